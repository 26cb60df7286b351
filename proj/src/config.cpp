#include "fhj/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fhj/csv.hpp"
#include "fhj/kernel.hpp"

namespace fhj {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// strict base-10 decimal (sign, digits, point, exponent); no hex, no nan
double parse_decimal(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (v.empty()) throw std::invalid_argument("config: empty value for '" + key + "'");
  for (char c : v)
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' ||
          c == '.' || c == 'e' || c == 'E'))
      throw std::invalid_argument("config: '" + key + "' is not a base-10 number: '" +
                                  v + "'");
  const char* begin = v.c_str();
  char* end = nullptr;
  const double x = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw std::invalid_argument("config: '" + key + "' is not a base-10 number: '" + v +
                                "'");
  return x;
}

std::size_t parse_count(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw std::invalid_argument("config: '" + key + "' must be a nonnegative integer: '" +
                                v + "'");
  return static_cast<std::size_t>(std::strtoull(v.c_str(), nullptr, 10));
}

void check_vocab(const std::string& key, const std::string& value,
                 std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (value == a) return;
  std::string msg = "config: '" + key + "' must be one of {";
  bool first = true;
  for (const char* a : allowed) {
    msg += (first ? "" : ", ");
    msg += a;
    first = false;
  }
  throw std::invalid_argument(msg + "}, got '" + value + "'");
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "s")
    s = parse_decimal(key, value);
  else if (key == "p")
    p = parse_decimal(key, value);
  else if (key == "lambda")
    lambda = parse_decimal(key, value);
  else if (key == "domain.a")
    domain_a = parse_decimal(key, value);
  else if (key == "domain.b")
    domain_b = parse_decimal(key, value);
  else if (key == "grid.n")
    grid_n = parse_count(key, value);
  else if (key == "grid.ratio")
    grid_ratio = parse_decimal(key, value);
  else if (key == "kernel.kind") {
    check_vocab(key, value, {"unit", "physical", "pucci_plus", "pucci_minus"});
    kernel_kind = value;
  } else if (key == "kernel.gamma_lo")
    kernel_gamma_lo = parse_decimal(key, value);
  else if (key == "kernel.gamma_hi")
    kernel_gamma_hi = parse_decimal(key, value);
  else if (key == "source.kind") {
    check_vocab(key, value, {"zero", "constant", "power"});
    source_kind = value;
  } else if (key == "source.c")
    source_c = parse_decimal(key, value);
  else if (key == "source.kappa")
    source_kappa = parse_decimal(key, value);
  else if (key == "exterior.kind") {
    check_vocab(key, value, {"zero", "one"});
    exterior_kind = value;
  } else if (key == "case") {
    check_vocab(key, value, {"family", "scale_pos", "scale_neg"});
    case_kind = value;
  } else if (key == "t")
    t = parse_decimal(key, value);
  else if (key == "tol")
    tol = parse_decimal(key, value);
  else if (key == "out.dir") {
    if (value.empty()) throw std::invalid_argument("config: out.dir must be nonempty");
    out_dir = value;
  } else
    throw std::invalid_argument("config: unknown key '" + key + "'");
}

ExperimentConfig ExperimentConfig::parse_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not 'key = value': '" + line + "'");
    cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str());
}

void ExperimentConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("config: override must be key=value: '" + assignment +
                                "'");
  set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

std::vector<std::string> ExperimentConfig::canonical_lines() const {
  auto num = [](const char* k, double v) {
    return std::string(k) + " = " + format_number(v);
  };
  return {
      num("s", s),
      num("p", p),
      num("lambda", lambda),
      num("domain.a", domain_a),
      num("domain.b", domain_b),
      "grid.n = " + std::to_string(grid_n),
      num("grid.ratio", grid_ratio),
      "kernel.kind = " + kernel_kind,
      num("kernel.gamma_lo", kernel_gamma_lo),
      num("kernel.gamma_hi", kernel_gamma_hi),
      "source.kind = " + source_kind,
      num("source.c", source_c),
      num("source.kappa", source_kappa),
      "exterior.kind = " + exterior_kind,
      "case = " + case_kind,
      num("t", t),
      num("tol", tol),
      "out.dir = " + out_dir,
  };
}

ProblemSpec ExperimentConfig::to_problem() const {
  const Domain dom = Domain::interval(domain_a, domain_b);

  OperatorSpec op = OperatorSpec::linear(Kernel::unit(s));
  if (kernel_kind == "physical")
    op = OperatorSpec::linear(Kernel::scaled(s, physical_normalization(s)));
  else if (kernel_kind == "pucci_plus")
    op = OperatorSpec::pucci_plus(s, kernel_gamma_lo, kernel_gamma_hi);
  else if (kernel_kind == "pucci_minus")
    op = OperatorSpec::pucci_minus(s, kernel_gamma_lo, kernel_gamma_hi);

  SourceSpec src = SourceSpec::zero();
  if (source_kind == "constant") {
    const double c = source_c;
    src = SourceSpec::bounded([c](double) { return c; });
  } else if (source_kind == "power") {
    src = SourceSpec::power(source_c, source_kappa);
  }

  ExteriorData ext = ExteriorData::zero();
  if (exterior_kind == "one")
    ext = ExteriorData::bounded([](double) { return 1.0; });

  return ProblemSpec(s, p, lambda, dom, GridSpec{grid_n, grid_ratio}, src, ext, op);
}

BarrierCase ExperimentConfig::sub_case() const {
  if (case_kind == "scale_pos") return BarrierCase::scale_pos_sub;
  if (case_kind == "scale_neg") return BarrierCase::scale_neg_sub;
  return BarrierCase::family_sub;
}

BarrierCase ExperimentConfig::super_case() const {
  if (case_kind == "scale_pos") return BarrierCase::scale_pos_super;
  if (case_kind == "scale_neg") return BarrierCase::scale_neg_super;
  return BarrierCase::family_super;
}

}  // namespace fhj
