#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tep/equilibrium.hpp"
#include "tep/ingest.hpp"
#include "tep/risk.hpp"
#include "tep/welfare.hpp"

namespace tep::cli {

enum ExitCode { kOk = 0, kInputError = 1, kNumericalError = 2 };

struct RunConfig {
    std::filesystem::path config_path;
    Config config;
    std::filesystem::path data_dir;
    std::filesystem::path out_dir;
    std::string candidate_line;
    bool expand_candidate = true;
    bool expand_generators = true;
    bool expand_renewables = true;
    AllocationRule allocation;
    std::string shares;  // empty: equal split between the line's end countries
    std::vector<std::string> mechanisms;
    double alpha = 0.8;
    CvarBasis cvar_basis = CvarBasis::Loss;
    ToleranceSet tolerances;
};

struct Overrides {
    std::optional<std::string> line;
    std::optional<std::uint64_t> seed;
    std::optional<double> alpha;
    std::optional<std::string> mechanisms;
    std::optional<std::filesystem::path> out;
};

RunConfig load_run_config(const std::filesystem::path& path, const Overrides& overrides = {});

int cmd_validate(const RunConfig& rc, std::ostream& out, std::ostream& err);
int cmd_compare(const RunConfig& rc, std::ostream& out, std::ostream& err);
int cmd_compensate(const RunConfig& rc, std::ostream& out, std::ostream& err);
int cmd_report(const std::filesystem::path& dir, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches; never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a of a byte string, as a 16-digit hex string.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace tep::cli
