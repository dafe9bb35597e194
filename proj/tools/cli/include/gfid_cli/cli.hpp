#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <gfid/model.hpp>
#include <gfid/reference.hpp>

namespace gfid::cli {

enum class Command { kReport, kSimulate, kValidate, kSchedule };
enum class Format { kText, kCsv, kJson };

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationFailed = 1;
inline constexpr int kExitUsage = 2;

struct RunSpec {
  Command command = Command::kReport;
  std::string network;
  std::string layers;  // e.g. "1-5,8"; empty selects every layer
  std::optional<std::string> out_path;
  Format format = Format::kText;
  bool compare = false;
  std::uint32_t scale = 1;
  std::uint64_t seed = 1;
  std::string profile = "published";
  bool timing_only = false;
  unsigned threads = 1;
  std::uint32_t w_f = 0;
  std::uint32_t s = 0;
  std::uint32_t n = 0;
};

/// One-based layer indices in ascending order. Throws Error on syntax errors
/// or indices outside [1, layer_count].
std::vector<std::size_t> parse_layer_range(std::string_view expr, std::size_t layer_count);

/// Divides channel counts (conv c_in/c_out, FC n/m) by `scale`, rounding up
/// and keeping conv channels a multiple of the layer's groups.
LayerConfig scale_layer(const LayerConfig& layer, std::uint32_t scale);

/// GFID_SIM_THREADS if set to a positive integer, else the hardware count.
unsigned threads_from_env();

const ReferenceData& embedded_reference();

int cmd_report(const RunSpec& spec, std::ostream& out);
int cmd_simulate(const RunSpec& spec, std::ostream& out);
int cmd_validate(const RunSpec& spec, std::ostream& out);
int cmd_schedule(const RunSpec& spec, std::ostream& out);

/// Parses arguments and dispatches; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gfid::cli
