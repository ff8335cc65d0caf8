#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace agora {

struct AcceptanceResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

// Runs the full acceptance suite. self_exe must point at an executable that
// understands `--emit-report <bundled scenario>` (used for the cross-process
// determinism check); pass an empty string to skip process respawning and
// fall back to in-process double runs.
std::vector<AcceptanceResult> run_acceptance_suite(
    const std::string& self_exe);

// One line per criterion; returns true when every criterion passed.
bool print_acceptance(std::ostream& os,
                      const std::vector<AcceptanceResult>& results);

// Prints the bundled scenario's episode report JSON to os; exit-code style
// return (0 = ok).
int emit_report_for(const std::string& scenario_name, std::ostream& os);

}  // namespace agora
