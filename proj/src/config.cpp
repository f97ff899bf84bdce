#include "kgl/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "kgl/errors.hpp"
#include "kgl/profiles.hpp"

namespace kgl {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_number(const std::string& s, const std::string& what) {
  char* end = nullptr;
  const std::string t = trim(s);
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size())
    throw ConfigError(what + ": '" + t + "' is not a number");
  return v;
}

int parse_int(const std::string& s, const std::string& what) {
  const double v = parse_number(s, what);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    throw ConfigError(what + ": '" + trim(s) + "' is not an integer");
  return i;
}

// "name", "name(a)", "name(a, b)", or "table:path"
struct ProfileSpec {
  std::string name;
  std::vector<std::string> args;
};

ProfileSpec parse_spec(const std::string& s) {
  ProfileSpec p;
  const std::string t = trim(s);
  if (t.rfind("table:", 0) == 0) {
    p.name = "table";
    p.args.push_back(trim(t.substr(6)));
    return p;
  }
  const size_t open = t.find('(');
  if (open == std::string::npos) {
    p.name = t;
    return p;
  }
  if (t.back() != ')')
    throw ConfigError("profile '" + t + "': missing closing parenthesis");
  p.name = trim(t.substr(0, open));
  std::string inner = t.substr(open + 1, t.size() - open - 2);
  size_t pos = 0;
  while (pos <= inner.size()) {
    const size_t comma = inner.find(',', pos);
    const std::string piece =
        comma == std::string::npos ? inner.substr(pos) : inner.substr(pos, comma - pos);
    p.args.push_back(trim(piece));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return p;
}

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (base_dir.empty() || path.empty() || path.front() == '/') return path;
  return base_dir + "/" + path;
}

ProfilePtr make_fm(const std::string& spec, const std::string& base_dir) {
  const ProfileSpec p = parse_spec(spec);
  if (p.name == "euclidean" && p.args.empty()) return make_euclidean_fm();
  if (p.name == "hyperbolic" && p.args.size() == 1)
    return make_hyperbolic_fm(parse_number(p.args[0], "metric.fm hyperbolic k0"));
  if (p.name == "table" && p.args.size() == 1)
    return load_table_profile(resolve(base_dir, p.args[0]));
  throw ConfigError("metric.fm '" + trim(spec) +
                    "' not recognized (euclidean | hyperbolic(k0) | table:path)");
}

ProfilePtr make_rho(const std::string& spec, const std::string& base_dir) {
  const ProfileSpec p = parse_spec(spec);
  if (p.name == "constant" && p.args.size() == 1)
    return make_constant_rho(parse_number(p.args[0], "rho constant c"));
  if (p.name == "exp_decay" && p.args.size() == 2) {
    const double c = parse_number(p.args[0], "rho exp_decay c");
    if (p.args[1] == "log1p") return make_exp_decay_rho(c, PsiKind::kLog1p);
    if (p.args[1] == "linear") return make_exp_decay_rho(c, PsiKind::kLinear);
    throw ConfigError("rho exp_decay psi '" + p.args[1] +
                      "' not recognized (log1p | linear)");
  }
  if (p.name == "table" && p.args.size() == 1)
    return load_table_profile(resolve(base_dir, p.args[0]));
  throw ConfigError("rho '" + trim(spec) +
                    "' not recognized (constant(c) | exp_decay(c, psi) | table:path)");
}

}  // namespace

GeometryConfig parse_geometry_config(const std::string& text,
                                     const std::string& base_dir) {
  GeometryConfig c;
  std::map<std::string, std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (val.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty value for '" +
                        key + "'");
    if (!seen.emplace(key, val).second)
      throw ConfigError("duplicate key '" + key + "'");

    if (key == "dim_m") {
      c.dim_m = parse_int(val, "dim_m");
      if (c.dim_m < 2) throw ConfigError("dim_m must be >= 2");
    } else if (key == "metric.kind") {
      if (val != "radial" && val != "grid2d")
        throw ConfigError("metric.kind must be radial or grid2d");
      c.kind = val;
    } else if (key == "metric.fm") {
      c.fm = val;
    } else if (key == "rho") {
      c.rho = val;
    } else if (key == "k0") {
      const double k = parse_number(val, "k0");
      if (k < 0.0) throw ConfigError("k0 must be >= 0");
      c.k0 = k;
    } else if (key == "grid.radius") {
      c.grid_radius = parse_number(val, "grid.radius");
      if (!(c.grid_radius > 0.0)) throw ConfigError("grid.radius must be > 0");
    } else if (key == "grid.nr") {
      c.grid_nr = parse_int(val, "grid.nr");
    } else if (key == "grid.ntheta") {
      c.grid_ntheta = parse_int(val, "grid.ntheta");
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  }
  if (c.kind == "grid2d" && c.dim_m != 2)
    throw ConfigError("grid2d geometries are two dimensional; dim_m must be 2");

  // validate the profile specs eagerly, so errors carry config context
  make_fm(c.fm, base_dir);
  make_rho(c.rho, base_dir);
  if (!base_dir.empty()) {
    auto rebase = [&base_dir](std::string& spec) {
      const ProfileSpec p = parse_spec(spec);
      if (p.name == "table") spec = "table:" + resolve(base_dir, p.args[0]);
    };
    rebase(c.fm);
    rebase(c.rho);
  }
  return c;
}

GeometryConfig load_geometry_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  const size_t slash = path.find_last_of('/');
  const std::string dir = slash == std::string::npos ? "" : path.substr(0, slash);
  return parse_geometry_config(text.str(), dir);
}

WarpedProduct make_geometry(const GeometryConfig& c) {
  ProfilePtr fm = make_fm(c.fm, "");
  ProfilePtr rho = make_rho(c.rho, "");
  if (c.kind == "grid2d")
    return WarpedProduct::make_grid2d(std::move(fm), std::move(rho), c.grid_radius,
                                      c.grid_nr, c.grid_ntheta, c.k0);
  return WarpedProduct::make_radial(c.dim_m, std::move(fm), std::move(rho), c.k0);
}

std::uint64_t geometry_hash(const GeometryConfig& c) {
  const std::string text = make_geometry(c).describe();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace kgl
