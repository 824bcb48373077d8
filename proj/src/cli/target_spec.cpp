#include <charconv>
#include <cmath>
#include <optional>
#include <string>

#include "qmatch/cli.hpp"
#include "qmatch/errors.hpp"

namespace qmatch::cli {

const char* const kTargetGrammar =
    "target spec grammar: name[:key=val,...]\n"
    "  gaussian | normal\n"
    "  uniform\n"
    "  logistic\n"
    "  cauchy                     (t with nu = 1)\n"
    "  t:nu=<nu>  | t:inv_nu=<x>  (nu >= 1, inv_nu in [0,1])\n"
    "  alpha:a=<a>[,b=<b>]        (a, b in [-1,1]; b defaults to a)";

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void fail(std::string_view spec, const std::string& why) {
  throw UsageError("cannot parse target spec '" + std::string(spec) + "': " + why + "\n" +
                   kTargetGrammar);
}

double parse_number(std::string_view spec, std::string_view text) {
  double v = 0.0;
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  if (!text.empty() && text.front() == '+') ++begin;
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    fail(spec, "'" + std::string(text) + "' is not a number");
  }
  return v;
}

}  // namespace

TargetDistribution parse_target_spec(std::string_view raw) {
  const std::string spec = trim(raw);
  if (spec.empty()) fail(raw, "empty spec");
  const auto colon = spec.find(':');
  const std::string name = trim(std::string_view(spec).substr(0, colon));

  std::vector<std::pair<std::string, double>> params;
  if (colon != std::string::npos) {
    std::string_view rest = std::string_view(spec).substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string item = trim(rest.substr(0, comma));
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      const auto eq = item.find('=');
      if (eq == std::string::npos) fail(raw, "parameter '" + item + "' is not key=val");
      params.emplace_back(trim(std::string_view(item).substr(0, eq)),
                          parse_number(raw, trim(std::string_view(item).substr(eq + 1))));
    }
  }
  auto no_params = [&] {
    if (!params.empty()) fail(raw, "'" + name + "' takes no parameters");
  };

  try {
    if (name == "gaussian" || name == "normal") {
      no_params();
      return TargetDistribution::gaussian();
    }
    if (name == "uniform") {
      no_params();
      return TargetDistribution::uniform();
    }
    if (name == "logistic") {
      no_params();
      return TargetDistribution::logistic();
    }
    if (name == "cauchy") {
      no_params();
      return TargetDistribution::student_t_inv_nu(1.0);
    }
    if (name == "t") {
      if (params.size() != 1) fail(raw, "t needs exactly one of nu=, inv_nu=");
      const auto& [key, value] = params.front();
      if (key == "nu") {
        if (!(value > 0.0)) fail(raw, "nu must be positive");
        return TargetDistribution::student_t_inv_nu(1.0 / value);
      }
      if (key == "inv_nu") return TargetDistribution::student_t_inv_nu(value);
      fail(raw, "unknown t parameter '" + key + "'");
    }
    if (name == "alpha") {
      std::optional<double> a;
      std::optional<double> b;
      for (const auto& [key, value] : params) {
        if (key == "a" || key == "alpha") {
          a = value;
        } else if (key == "b" || key == "beta") {
          b = value;
        } else {
          fail(raw, "unknown alpha parameter '" + key + "'");
        }
      }
      if (!a) fail(raw, "alpha needs a=");
      return TargetDistribution::alpha_beta(*a, b.value_or(*a));
    }
  } catch (const DomainError& e) {
    fail(raw, e.what());
  }
  fail(raw, "unknown target '" + name + "'");
}

std::vector<TargetDistribution> parse_target_list(std::string_view list) {
  std::vector<std::string> specs;
  std::string_view rest = list;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string token = trim(rest.substr(0, comma));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    if (token.empty()) continue;
    const bool continues = token.find('=') != std::string::npos && token.find(':') == std::string::npos;
    if (continues) {
      if (specs.empty()) fail(list, "parameter '" + token + "' has no target before it");
      specs.back() += "," + token;
    } else {
      specs.push_back(token);
    }
  }
  if (specs.empty()) throw UsageError(std::string("empty target list\n") + kTargetGrammar);
  std::vector<TargetDistribution> out;
  out.reserve(specs.size());
  for (const auto& s : specs) out.push_back(parse_target_spec(s));
  return out;
}

}  // namespace qmatch::cli
