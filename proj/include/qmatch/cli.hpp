#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qmatch/linmodel.hpp"
#include "qmatch/target_distribution.hpp"
#include "qmatch/translik.hpp"

namespace qmatch::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kUsage = 2, kDataError = 3, kNumericFailure = 4 };

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Grammar accepted by parse_target_spec.
extern const char* const kTargetGrammar;

/// name[:key=val,...], e.g. "gaussian", "t:nu=6.67", "t:inv_nu=0.15",
/// "alpha:a=-0.05,b=-0.05", "uniform", "logistic", "cauchy".
TargetDistribution parse_target_spec(std::string_view spec);

/// Comma-separated list of target specs. A comma-separated token of the form
/// key=val continues the parameters of the preceding spec, so
/// "alpha:a=-0.05,b=-0.05,logistic" is two targets.
std::vector<TargetDistribution> parse_target_list(std::string_view list);

/// Response vector with its row-column layout, as stored in data CSV files
/// (header index,row,col,y; 0-based labels).
struct DataSet {
  std::vector<double> y;
  std::size_t nrows = 0;
  std::size_t ncols = 0;
  std::vector<Cell> layout;

  DesignSpec design(ModelKind model) const { return DesignSpec(nrows, ncols, layout, model); }
};

/// Decimal form with 17 significant digits; parses back to the same double.
std::string format_double(double v);

void write_data_csv(const std::filesystem::path& path, const DataSet& data);
DataSet read_data_csv(const std::filesystem::path& path);

/// Curve CSV: param,value,det_term,jacobian_term; failed points leave the
/// last three fields empty.
void write_curve_csv(const std::filesystem::path& path, const ProfileCurve& curve);

/// Entry point shared by the qmatch executable and the tests. Returns the
/// process exit code.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qmatch::cli
