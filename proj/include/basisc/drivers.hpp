#pragma once

#include <map>
#include <string>
#include <vector>

#include "basisc/simulator.hpp"

namespace basisc {

// Configuration shared by all algorithm drivers. Unset values fall back to
// per-driver defaults.
struct DriverConfig {
    long long shots = 256;
    uint64_t seed = 0;
    double tol = kDefaultTol;
    int max_qubits = 20;
    std::map<std::string, long long> sets;
    std::map<std::string, std::string> args;
    std::vector<double> phases;
};

struct DriverResult {
    bool success = false;
    std::string answer;
    long long invocations = 0;     // quantum kernel invocations used
    std::vector<BitWord> rows;     // Simon: accepted measurement rows
    Histogram histogram;           // raw outcomes where meaningful
    RunStats stats;
};

std::vector<std::string> driver_names();
DriverResult run_driver(const std::string &name, const DriverConfig &cfg);

// Exposed for tests: prepares (parse + monomorphize + check) a bundled
// program with the given bindings.
SpecProgram prepare_corpus(const std::string &corpus_name, const std::string &entry,
                           const MonoConfig &mono, double tol = kDefaultTol);

} // namespace basisc
