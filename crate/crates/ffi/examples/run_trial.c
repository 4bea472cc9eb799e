/* Build: cargo build -p sclera-sim-ffi --release
 *        cc examples/run_trial.c -Iinclude -L../../target/release -l:libsclera_sim_ffi.a -lm -lpthread -ldl -o run_trial */
#include <stdio.h>
#include "sclera_sim.h"

int main(void) {
    SsScenario *scenario = NULL;
    SsTrial *trial = NULL;
    SsMetrics m;

    if (ss_scenario_default(SS_MODE_ACTIVE, SS_SKILL_NOVICE, 42, &scenario) != SS_STATUS_OK ||
        ss_run_trial(scenario, &trial) != SS_STATUS_OK ||
        ss_trial_metrics(trial, &m) != SS_STATUS_OK) {
        fprintf(stderr, "error: %s\n", ss_last_error_message());
        ss_scenario_free(scenario);
        return 1;
    }
    printf("sclera-sim %s: %.2f s, %.3f s over bound, mean %.1f mN, %zu switches\n",
           ss_version(), m.total_time, m.time_over_unsafe, m.mean_force, m.n_switches);
    ss_trial_free(trial);
    ss_scenario_free(scenario);
    return 0;
}
