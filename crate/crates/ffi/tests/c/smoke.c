#include <math.h>
#include <stdio.h>
#include "contact_triple.h"

#define CHECK(cond) do { if (!(cond)) { fprintf(stderr, "failed: %s (%s)\n", #cond, ct_last_error() ? ct_last_error() : ""); return 1; } } while (0)

int main(void) {
    CtSection *h = NULL;
    CHECK(ct_section_from_json("{\"bundle\": {\"kind\": \"trivial\", \"dim\": 1}, \"side\": \"hamiltonian\","
                               " \"hamiltonian\": {\"builtin\": \"damped-free\"}}", &h) == CT_STATUS_OK);
    double x = 0.0, p = 1.0, xdot, pdot, zdot;
    CHECK(ct_contact_field(h, 0, &x, &p, 0.0, &xdot, &pdot, &zdot) == CT_STATUS_OK);
    CHECK(xdot == 1.0 && pdot == -0.5 && zdot == 0.5);
    ct_section_free(h);

    CHECK(ct_section_from_json("{\"bundle\": {\"kind\": \"trivial\", \"dim\": 1}}", &h) == CT_STATUS_CONFIG);
    CHECK(ct_last_error() != NULL);

    CtTrajectory *t = NULL;
    CHECK(ct_scenario_run("{\"bundle\": {\"kind\": \"trivial\", \"dim\": 1}, \"side\": \"hamiltonian\","
                          " \"hamiltonian\": {\"builtin\": \"damped-free\"}, \"duration\": 10}", &t) == CT_STATUS_OK);
    size_t n = ct_trajectory_len(t);
    double s, state[3];
    size_t chart;
    CHECK(ct_trajectory_width(t) == 3);
    CHECK(ct_trajectory_sample(t, n - 1, &s, &chart, state) == CT_STATUS_OK);
    CHECK(s == 10.0 && fabs(state[1] - exp(-5.0)) < 1e-6 * exp(-5.0));
    CHECK(ct_trajectory_sample(t, n, &s, &chart, state) == CT_STATUS_INVALID_ARGUMENT);
    ct_trajectory_free(t);
    printf("ok %s\n", ct_version());
    return 0;
}
