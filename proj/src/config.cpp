#include "shapeopt/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "shapeopt/steklov.hpp"

namespace shapeopt {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string format_double(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_double(std::string_view s, std::string_view key) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size())
    throw Error("invalid number '" + std::string(s) + "' for " + std::string(key));
  return v;
}

template <typename Int>
Int parse_int(std::string_view s, std::string_view key) {
  Int v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size())
    throw Error("invalid integer '" + std::string(s) + "' for " + std::string(key));
  return v;
}

bool parse_bool(std::string_view s, std::string_view key) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw Error("invalid boolean '" + std::string(s) + "' for " + std::string(key));
}

struct Entry {
  std::string_view section;
  std::string_view key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, std::string_view)> set;
};

#define SHAPEOPT_DOUBLE(sec, name)                                                   \
  Entry {                                                                            \
    sec, #name, [](const ExperimentConfig& c) { return format_double(c.name); },     \
        [](ExperimentConfig& c, std::string_view v) { c.name = parse_double(v, #name); } \
  }
#define SHAPEOPT_INT(sec, name)                                                                          \
  Entry {                                                                                                \
    sec, #name, [](const ExperimentConfig& c) { return std::to_string(c.name); },                        \
        [](ExperimentConfig& c, std::string_view v) { c.name = parse_int<decltype(c.name)>(v, #name); } \
  }
#define SHAPEOPT_BOOL(sec, name)                                                           \
  Entry {                                                                                  \
    sec, #name, [](const ExperimentConfig& c) { return std::string(c.name ? "true" : "false"); }, \
        [](ExperimentConfig& c, std::string_view v) { c.name = parse_bool(v, #name); }     \
  }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      SHAPEOPT_DOUBLE("model", k1),
      SHAPEOPT_DOUBLE("model", k2),
      SHAPEOPT_DOUBLE("model", final_time),
      SHAPEOPT_INT("model", n_steps),
      SHAPEOPT_DOUBLE("regularization", mu_reg),
      SHAPEOPT_DOUBLE("regularization", mu_init),
      SHAPEOPT_INT("regularization", decay_iters),
      SHAPEOPT_DOUBLE("elasticity", young),
      SHAPEOPT_DOUBLE("elasticity", poisson),
      Entry{"optimizer", "method", [](const ExperimentConfig& c) { return std::string(to_string(c.method)); },
            [](ExperimentConfig& c, std::string_view v) { c.method = parse_method(v); }},
      SHAPEOPT_INT("optimizer", memory),
      SHAPEOPT_INT("optimizer", max_iter),
      SHAPEOPT_DOUBLE("optimizer", gradient_tol),
      SHAPEOPT_BOOL("optimizer", restrict_load),
      SHAPEOPT_BOOL("optimizer", observation_term),
      SHAPEOPT_BOOL("optimizer", armijo),
      SHAPEOPT_DOUBLE("optimizer", armijo_slope),
      SHAPEOPT_DOUBLE("optimizer", backtrack_factor),
      SHAPEOPT_INT("optimizer", max_backtracks),
      SHAPEOPT_DOUBLE("optimizer", injectivity_bound),
      SHAPEOPT_DOUBLE("surface", sobolev_a),
      SHAPEOPT_INT("mesh", cells),
      SHAPEOPT_INT("mesh", target_cells),
      Entry{"mesh", "initial_shape", [](const ExperimentConfig& c) { return c.initial_shape.to_string(); },
            [](ExperimentConfig& c, std::string_view v) { c.initial_shape = ShapeSpec::parse(v); }},
      Entry{"mesh", "target_shape", [](const ExperimentConfig& c) { return c.target_shape.to_string(); },
            [](ExperimentConfig& c, std::string_view v) { c.target_shape = ShapeSpec::parse(v); }},
      SHAPEOPT_DOUBLE("solver", cg_tol),
      SHAPEOPT_INT("solver", cg_max_iter),
      Entry{"output", "output_dir", [](const ExperimentConfig& c) { return c.output_dir; },
            [](ExperimentConfig& c, std::string_view v) { c.output_dir = std::string(v); }},
      SHAPEOPT_INT("output", seed),
  };
  return table;
}

#undef SHAPEOPT_DOUBLE
#undef SHAPEOPT_INT
#undef SHAPEOPT_BOOL

const Entry& find_entry(std::string_view section, std::string_view key) {
  for (const auto& e : entries())
    if (e.key == key && (section.empty() || e.section == section)) return e;
  throw Error("unknown configuration key '" + (section.empty() ? "" : std::string(section) + ".") +
              std::string(key) + "'");
}

// Ray from the origin against an ellipse centred at (cx, cy).
double shifted_ellipse_radius(double a, double b, double cx, double cy, double t) {
  const double dx = std::cos(t) / a, dy = std::sin(t) / b;
  const double ox = -cx / a, oy = -cy / b;
  const double qa = dx * dx + dy * dy;
  const double qb = 2.0 * (ox * dx + oy * dy);
  const double qc = ox * ox + oy * oy - 1.0;
  const double disc = qb * qb - 4.0 * qa * qc;
  return (-qb + std::sqrt(disc)) / (2.0 * qa);
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::lbfgs: return "lbfgs";
    case Method::full_bfgs: return "full_bfgs";
    case Method::gradient: return "gradient";
    case Method::surface_lbfgs: return "surface_lbfgs";
    case Method::surface_gradient: return "surface_gradient";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (auto m : {Method::lbfgs, Method::full_bfgs, Method::gradient, Method::surface_lbfgs, Method::surface_gradient})
    if (to_string(m) == name) return m;
  throw Error("unknown method '" + std::string(name) + "'");
}

bool uses_surface_form(Method method) {
  return method == Method::surface_lbfgs || method == Method::surface_gradient;
}

RadialProfile ShapeSpec::profile() const {
  auto need = [&](std::size_t n) {
    if (params.size() != n) throw Error("shape '" + kind + "' expects " + std::to_string(n) + " parameters");
  };
  if (kind == "circle") {
    need(1);
    return circle_profile(params[0]);
  }
  if (kind == "ellipse") {
    need(2);
    return ellipse_profile(params[0], params[1]);
  }
  if (kind == "star") {
    need(3);
    const double r0 = params[0], amp = params[1], k = params[2];
    return [r0, amp, k](double t) { return r0 + amp * std::cos(k * t); };
  }
  if (kind == "shifted_ellipse") {
    need(4);
    const double a = params[0], b = params[1], cx = params[2], cy = params[3];
    if ((cx / a) * (cx / a) + (cy / b) * (cy / b) >= 1.0) throw Error("shifted ellipse must contain the origin");
    return [a, b, cx, cy](double t) { return shifted_ellipse_radius(a, b, cx, cy, t); };
  }
  throw Error("unknown shape kind '" + kind + "'");
}

std::string ShapeSpec::to_string() const {
  std::string out = kind;
  for (double p : params) out += " " + format_double(p);
  return out;
}

ShapeSpec ShapeSpec::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  ShapeSpec spec;
  if (!(in >> spec.kind)) throw Error("empty shape description");
  spec.params.clear();
  std::string token;
  while (in >> token) spec.params.push_back(parse_double(token, "shape parameter"));
  (void)spec.profile();
  return spec;
}

void ExperimentConfig::set(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw Error("expected key=value, got '" + std::string(assignment) + "'");
  const std::string lhs = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  const auto dot = lhs.find('.');
  if (dot == std::string::npos) find_entry({}, lhs).set(*this, value);
  else find_entry(std::string_view(lhs).substr(0, dot), std::string_view(lhs).substr(dot + 1)).set(*this, value);
}

void ExperimentConfig::validate() const {
  if (!(k1 > 0.0) || !(k2 > 0.0)) throw Error("k1 and k2 must be positive");
  if (!(final_time > 0.0) || n_steps < 1) throw Error("final_time must be positive and n_steps >= 1");
  if (mu_reg < 0.0 || mu_init < mu_reg || decay_iters < 0) throw Error("need mu_init >= mu_reg >= 0 and decay_iters >= 0");
  (void)lame_from_young_poisson(young, poisson);
  if (memory < 1 || max_iter < 0) throw Error("memory must be >= 1 and max_iter >= 0");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0) || max_backtracks < 0)
    throw Error("backtrack_factor must lie in (0, 1)");
  if (!(injectivity_bound > 0.0 && injectivity_bound < 1.0)) throw Error("injectivity_bound must lie in (0, 1)");
  if (!(sobolev_a > 0.0)) throw Error("sobolev_a must be positive");
  if (cells < 50 || target_cells < 50) throw Error("meshes need at least 50 cells");
  if (!(cg_tol > 0.0) || cg_max_iter < 1) throw Error("invalid solver tolerance");
  (void)initial_shape.profile();
  (void)target_shape.profile();
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig config;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw Error("malformed section header on line " + std::to_string(lineno));
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw Error("expected key = value on line " + std::to_string(lineno));
    find_entry(section, trim(std::string_view(t).substr(0, eq))).set(config, trim(std::string_view(t).substr(eq + 1)));
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path);
  return parse_config(in);
}

std::string serialize(const ExperimentConfig& config) {
  std::string out;
  std::string_view section;
  for (const auto& e : entries()) {
    if (e.section != section) {
      if (!section.empty()) out += '\n';
      section = e.section;
      out += "[" + std::string(section) + "]\n";
    }
    out += std::string(e.key) + " = " + e.get(config) + "\n";
  }
  return out;
}

}  // namespace shapeopt
