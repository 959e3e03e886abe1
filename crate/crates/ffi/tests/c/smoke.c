#include <stdio.h>
#include <stdlib.h>

#include "lagrad.h"

static const char *CONFIG =
    "n_cells = 24\n"
    "t_end = 0.05\n"
    "[params]\n"
    "g_grav = 0.1\n"
    "p_ext = 0.5\n"
    "[initial]\n"
    "theta = { kind = \"gaussian-bump\", base = 1.0, amplitude = 0.5, center = 0.5, width = 0.1 }\n";

int main(void) {
    LagradSim *sim = NULL;
    if (lagrad_sim_from_toml(CONFIG, &sim) != LAGRAD_STATUS_OK) {
        fprintf(stderr, "create: %s\n", lagrad_last_error_message());
        return 1;
    }
    if (lagrad_sim_run_until(sim, 0.05) != LAGRAD_STATUS_OK) {
        fprintf(stderr, "run: %s\n", lagrad_last_error_message());
        return 1;
    }
    size_t n = 0;
    lagrad_sim_n_cells(sim, &n);
    double *u = malloc((n + 1) * sizeof(double));
    if (lagrad_sim_copy_field(sim, LAGRAD_FIELD_U, u, n + 1) != LAGRAD_STATUS_OK) return 1;
    if (lagrad_sim_copy_field(sim, LAGRAD_FIELD_U, u, n) != LAGRAD_STATUS_BUFFER_TOO_SMALL) return 1;

    LagradDiagnostics d;
    lagrad_sim_diagnostics(sim, &d);
    printf("t=%.17g width=%.17g u0=%.17g\n", d.t, d.width, u[0]);

    free(u);
    lagrad_sim_free(sim);
    LagradSim *bad = NULL;
    if (lagrad_sim_from_toml("n_cells = 2\n", &bad) != LAGRAD_STATUS_VALIDATION || bad != NULL) return 1;
    return 0;
}
