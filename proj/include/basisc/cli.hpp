#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "basisc/drivers.hpp"

namespace basisc {

// Exit codes (stable contract): 0 success, 1 parse/IO error, 2 type error,
// 3 runtime simulation error.
struct CliConfig {
    std::string source;
    std::string entry = "kernel";
    std::map<std::string, long long> sets;
    std::map<std::string, std::string> args;
    long long shots = 1024;
    uint64_t seed = 0;
    double tol = kDefaultTol;
    int max_qubits = 20;
    std::string phases_file;
    std::string format = "json"; // json | text
};

int cmd_check(const CliConfig &cfg, std::ostream &out, std::ostream &err);
int cmd_run(const CliConfig &cfg, std::ostream &out, std::ostream &err);
int cmd_lower(const CliConfig &cfg, const std::string &expr_text, std::ostream &out,
              std::ostream &err);
int cmd_eval(const CliConfig &cfg, const std::string &fn, const std::string &input,
             std::ostream &out, std::ostream &err);
int cmd_driver(const CliConfig &cfg, const std::string &name, std::ostream &out,
               std::ostream &err);
// Host-side post-processing helpers for scripting: binfrac, cfrac, below,
// gf2, grover-iters, gcd, lcm, modinv.
int cmd_post(const std::string &op, const std::vector<std::string> &operands,
             std::ostream &out, std::ostream &err);

std::string histogram_json(const Histogram &h, uint64_t seed);
std::string histogram_text(const Histogram &h, uint64_t seed);
std::vector<double> load_phase_schedule(const std::string &path);

} // namespace basisc
