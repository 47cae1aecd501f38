#pragma once

// Subcommands of the `peano` tool. Kept in a header so the test suite can
// drive the same code paths in-process.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "peano/peano.hpp"

namespace peano::cli {

using Json = nlohmann::ordered_json;

/// Rows of text cells with a header; serialized deterministically.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void write_csv(std::ostream& os) const {
    auto line = [&os](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
      os << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
  }
};

inline std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

inline std::string decimal_of(const ExactReal& v, unsigned digits) {
  if (v.is_rational()) return to_decimal(v.rat(), digits);
  std::ostringstream os;
  os << std::fixed << std::setprecision(static_cast<int>(std::min(digits, 17U))) << v.to_double();
  return os.str();
}

struct Options {
  std::string out;
  unsigned decimals = 0;
  bool unsafe_depth = false;
};

/// Result of one command: a table plus parameters echoed into the manifest.
struct Outcome {
  Table table;
  Json params = Json::object();
  std::vector<std::string> text_lines;  // used instead of a table by `eval`
  int exit_code = 0;
};

inline std::filesystem::path resolve_output(const std::string& out) {
  std::filesystem::path p(out);
  if (p.is_relative()) {
    if (const char* dir = std::getenv("PEANO_OUT_DIR"); dir != nullptr && *dir != '\0') p = std::filesystem::path(dir) / p;
  }
  return p;
}

inline void emit(const Outcome& outcome, const Options& opts, const std::string& command, double seconds, std::ostream& out) {
  if (!outcome.text_lines.empty()) {
    for (const auto& l : outcome.text_lines) out << l << '\n';
    return;
  }
  if (opts.out.empty()) {
    outcome.table.write_csv(out);
    return;
  }
  const auto path = resolve_output(opts.out);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  {
    std::ofstream f(path);
    if (!f) throw Error(Errc::invalid_argument, "cannot write " + path.string());
    outcome.table.write_csv(f);
  }
  Json manifest;
  manifest["command"] = command;
  manifest["version"] = kVersion;
  manifest["parameters"] = outcome.params;
  manifest["columns"] = outcome.table.header;
  manifest["rows"] = outcome.table.rows.size();
  manifest["output"] = path.string();
  manifest["wall_time_seconds"] = seconds;
  std::ofstream m(path.string() + ".manifest.json");
  m << manifest.dump(2) << '\n';
  out << "wrote " << path.string() << '\n';
}

inline Json error_json(std::string_view code, const std::string& message) {
  Json j;
  j["error"] = code;
  j["message"] = message;
  return j;
}

inline int exit_code_for(Errc code) {
  return (code == Errc::depth_too_large || code == Errc::no_convergence) ? 2 : 1;
}

/// Comma-separated list of exact numbers.
inline std::vector<Rational> parse_rational_list(const std::string& text) {
  std::vector<Rational> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_rational(item));
  if (out.empty()) throw Error(Errc::parse_error, "empty list");
  return out;
}

/// Splices `key = value` lines of the file named by --config into the
/// argument list; options already on the command line take precedence.
inline std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream f(path);
  if (!f) throw Error(Errc::invalid_argument, "cannot read config file " + path);
  auto trim = [](std::string v) {
    const auto b = v.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = v.find_last_not_of(" \t\r");
    v = v.substr(b, e - b + 1);
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) v = v.substr(1, v.size() - 2);
    return v;
  };
  auto given = [&args](const std::string& flag) {
    for (const auto& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    }
    return false;
  };
  std::string line;
  unsigned number = 0;
  while (std::getline(f, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(Errc::parse_error, path + ":" + std::to_string(number) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string flag = "--" + key;
    if (key == "config" || given(flag)) continue;
    if (key == "unsafe-depth") {
      if (value == "true" || value == "1") args.push_back(flag);
      continue;
    }
    args.push_back(flag);
    args.push_back(value);
  }
  return args;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv, argv + argc);
  try {
    args = expand_config(std::move(args));
  } catch (const Error& e) {
    err << error_json(to_string(e.code()), e.what()).dump() << '\n';
    return 1;
  }
  std::string config_path;
  CLI::App app{"Exact computations for the horizontal component of the Peano curve"};
  app.require_subcommand(1);
  Options opts;

  std::string t_text = "1";
  std::string s_text = "0";
  std::string c_text;
  std::string r_text = "0";
  std::string z_text;
  std::string p_text;
  std::string a_text;
  std::string b_text;
  std::string g_text = "poly:1";
  std::string c_list_text;
  std::string rel_tol_text = "1/1000";
  std::string which = "x";
  unsigned depth = 1;
  unsigned max_depth = kDefaultTtvDepthCap;
  long n_min = 1;
  long n_max = 8;

  std::function<Outcome()> action;
  std::string command;

  auto common = [&](CLI::App* sub, bool with_out = true) {
    sub->add_option("--config", config_path, "Read options from a key = value file");
    sub->add_option("--decimals", opts.decimals, "Add decimal companion columns with this many digits");
    if (with_out) sub->add_option("--out", opts.out, "Write CSV here (plus a .manifest.json)");
    sub->add_flag("--unsafe-depth", opts.unsafe_depth, "Lift the default depth caps");
  };
  auto add_decimal = [&](std::vector<std::string>& row, const ExactReal& v) {
    if (opts.decimals > 0) row.push_back(decimal_of(v, opts.decimals));
  };
  auto decimal_header = [&](std::vector<std::string>& header, const std::string& name) {
    if (opts.decimals > 0) header.push_back(name + "_decimal");
  };
  const unsigned relaxed = 40;

  {
    auto* sub = app.add_subcommand("eval", "Evaluate x(t) and y(t)");
    sub->add_option("--t", t_text, "Time with a finite ternary expansion, e.g. 5/9^2")->required();
    common(sub, false);
    sub->callback([&] {
      command = "eval";
      action = [&] {
        const auto t = parse_time(t_text);
        const auto pt = curve_point(t);
        Outcome o;
        o.text_lines = {"t=" + to_string(t.value()), "x=" + to_string(pt.x), "y=" + to_string(pt.y)};
        if (opts.decimals > 0) {
          o.text_lines.push_back("x_decimal=" + to_decimal(pt.x, opts.decimals));
          o.text_lines.push_back("y_decimal=" + to_decimal(pt.y, opts.decimals));
        }
        return o;
      };
    });
  }
  {
    auto* sub = app.add_subcommand("polygon", "Vertices of the depth-m approximating polygon");
    sub->add_option("--depth", depth, "Polygon depth m (9^m + 1 vertices)")->required();
    sub->add_option("--which", which, "x (graph t,x) or xy (curve x,y)")->check(CLI::IsMember({"x", "xy"}));
    common(sub);
    sub->callback([&] {
      command = "polygon";
      action = [&] {
        const auto kind = which == "x" ? PolygonKind::x_graph : PolygonKind::xy_curve;
        const auto poly = polygon(depth, kind, opts.unsafe_depth ? 12 : kDefaultPolygonDepthCap);
        Outcome o;
        o.params = {{"depth", depth}, {"which", which}};
        const std::string a = kind == PolygonKind::x_graph ? "t" : "x";
        const std::string b = kind == PolygonKind::x_graph ? "x" : "y";
        o.table.header = {a, b};
        decimal_header(o.table.header, a);
        decimal_header(o.table.header, b);
        for (const auto& [u, v] : poly.vertices) {
          std::vector<std::string> row{to_string(u), to_string(v)};
          add_decimal(row, u);
          add_decimal(row, v);
          o.table.rows.push_back(std::move(row));
        }
        return o;
      };
    });
  }
  {
    auto* sub = app.add_subcommand("qv", "Quadratic variation along the Lebesgue partition of cZ + r");
    sub->add_option("--c", c_text, "Grid spacing")->required();
    sub->add_option("--r", r_text, "Grid offset, e.g. 1/18 or sqrt2/10");
    sub->add_option("--t", t_text, "End time");
    sub->add_option("--s", s_text, "Start time (partition restarted there)");
    common(sub);
    sub->callback([&] {
      command = "qv";
      action = [&] {
        const Grid grid(parse_rational(c_text), parse_exact_real(r_text));
        const auto s = parse_time(s_text);
        const auto t = parse_time(t_text);
        const QuadraticVariation engine(grid, opts.unsafe_depth ? BlockFold<detail::QvPolicy>::kMaxMemoDepth : kDefaultQvLeafCap);
        const Rational v = engine.qv_interval(s, t);
        Outcome o;
        o.params = {{"c", to_string(grid.c)}, {"r", to_string(grid.r)}, {"s", to_string(s.value())}, {"t", to_string(t.value())}};
        o.table.header = {"c", "r", "t", "qv"};
        decimal_header(o.table.header, "qv");
        std::vector<std::string> row{to_string(grid.c), to_string(grid.r), to_string(t.value()), to_string(v)};
        add_decimal(row, v);
        o.table.rows.push_back(std::move(row));
        return o;
      };
    });
  }
  {
    auto* sub = app.add_subcommand("sweep", "Quadratic variation along (p/3^n)Z + r/3^n against C_p t");
    sub->add_option("--p", p_text, "Spacing numerator p = p'/q'")->required();
    sub->add_option("--r", r_text, "Offset r of the unscaled grid");
    sub->add_option("--t", t_text, "End time");
    sub->add_option("--n-min", n_min, "First n");
    sub->add_option("--n-max", n_max, "Last n");
    common(sub);
    sub->callback([&] {
      command = "sweep";
      action = [&] {
        const Rational p = parse_rational(p_text);
        const ExactReal r = parse_exact_real(r_text);
        const auto t = parse_time(t_text);
        const auto rows = convergence_sweep(p, r, t, n_min, n_max, opts.unsafe_depth ? 11 : kDefaultSweepCap);
        Outcome o;
        o.params = {{"p", to_string(p)}, {"r", to_string(r)}, {"t", to_string(t.value())}, {"n_min", n_min}, {"n_max", n_max}};
        o.table.header = {"n", "c_n", "r_n", "qv", "limit", "rel_error"};
        decimal_header(o.table.header, "qv");
        for (const auto& row : rows) {
          std::vector<std::string> cells{std::to_string(row.n), to_string(row.c_n), to_string(row.r_n), to_string(row.qv), to_string(row.limit),
                                         fmt_double(row.rel_error)};
          add_decimal(cells, row.qv);
          o.table.rows.push_back(std::move(cells));
        }
        return o;
      };
    });
  }
  {
    auto* sub = app.add_subcommand("crossings", "Down- and upcrossings of [z - c/2, z + c/2]");
    sub->add_option("--z", z_text, "Interval centre")->required();
    sub->add_option("--c", c_text, "Interval width")->required();
    sub->add_option("--t", t_text, "End time");
    common(sub);
    sub->callback([&] {
      command = "crossings";
      action = [&] {
        const ExactReal z = parse_exact_real(z_text);
        const Rational c = parse_rational(c_text);
        const auto t = parse_time(t_text);
        const auto counts = CrossingCounter(z, c, opts.unsafe_depth ? BlockFold<detail::CrossingPolicy>::kMaxMemoDepth : kDefaultCrossingLeafCap).counts(t);
        Outcome o;
        o.params = {{"z", to_string(z)}, {"c", to_string(c)}, {"t", to_string(t.value())}};
        o.table.header = {"z", "c", "down", "up"};
        o.table.rows.push_back({to_string(z), to_string(c), std::to_string(counts.down), std::to_string(counts.up)});
        return o;
      };
    });
  }
  {
    auto* sub = app.add_subcommand("ttv", "Truncated variation by polygon refinement");
    sub->add_option("--c", c_text, "Truncation level")->required();
    sub->add_option("--t", t_text, "End time");
    sub->add_option("--rel-tol", rel_tol_text, "Relative tolerance between refinements");
    sub->add_option("--max-depth", max_depth, "Deepest polygon tried");
    common(sub);
    sub->callback([&] {
      command = "ttv";
      action = [&] {
        const Rational c = parse_rational(c_text);
        const auto t = parse_time(t_text);
        const auto res = truncated_variation(c, t, parse_rational(rel_tol_text), opts.unsafe_depth ? relaxed : max_depth);
        Outcome o;
        o.params = {{"c", to_string(c)}, {"t", to_string(t.value())}, {"rel_tol", rel_tol_text}, {"max_depth", max_depth}};
        o.table.header = {"c", "depth", "ttv", "bracket_lo", "bracket_hi"};
        decimal_header(o.table.header, "ttv");
        std::vector<std::string> row{to_string(c), std::to_string(res.depth), to_string(res.value), to_string(res.bracket_lo),
                                     res.bracket_hi ? to_string(*res.bracket_hi) : "inf"};
        add_decimal(row, res.value);
        o.table.rows.push_back(std::move(row));
        return o;
      };
    });
  }
  {
    auto* sub = app.add_subcommand("localtime", "Local-time profile at t = K/9^N");
    sub->add_option("--t", t_text, "Time K/9^N")->required();
    common(sub);
    sub->callback([&] {
      command = "localtime";
      action = [&] {
        const auto t = parse_time(t_text);
        const auto profile = local_time_profile(t, opts.unsafe_depth ? 12 : kDefaultLocalTimeCap);
        Outcome o;
        o.params = {{"t", to_string(t.value())}, {"depth", profile.depth}};
        o.table.header = {"cell_lo", "cell_hi", "value"};
        decimal_header(o.table.header, "value");
        const Rational w = profile.cell_width();
        for (std::size_t i = 0; i < profile.cells.size(); ++i) {
          const Rational lo = w * static_cast<unsigned long>(i);
          std::vector<std::string> row{to_string(lo), to_string(Rational(lo + w)), to_string(profile.cells[i])};
          add_decimal(row, profile.cells[i]);
          o.table.rows.push_back(std::move(row));
        }
        return o;
      };
    });
  }
  {
    auto* sub = app.add_subcommand("occupation", "Occupation time of [a,b] against the local-time integral");
    sub->add_option("--t", t_text, "Time K/9^N");
    sub->add_option("--a", a_text, "Lower level (triadic)")->required();
    sub->add_option("--b", b_text, "Upper level (triadic)")->required();
    common(sub);
    sub->callback([&] {
      command = "occupation";
      action = [&] {
        const auto t = parse_time(t_text);
        const Rational a = parse_rational(a_text);
        const Rational b = parse_rational(b_text);
        const auto check = occupation_identity_check(local_time_profile(t, opts.unsafe_depth ? 12 : kDefaultLocalTimeCap), a, b);
        Outcome o;
        o.params = {{"t", to_string(t.value())}, {"a", to_string(a)}, {"b", to_string(b)}};
        o.table.header = {"t", "a", "b", "occupation", "profile_integral", "residual"};
        o.table.rows.push_back({to_string(t.value()), to_string(a), to_string(b), to_string(check.occupation), to_string(check.profile_integral),
                                to_string(check.residual)});
        return o;
      };
    });
  }
  {
    auto* sub = app.add_subcommand("weaklimit", "Normalized crossing integrals against the local time");
    sub->add_option("--g", g_text, "Test function poly:a0,a1,... (ascending powers)");
    sub->add_option("--t", t_text, "Time K/9^N");
    sub->add_option("--c-list", c_list_text, "Decreasing widths, comma separated")->required();
    common(sub);
    sub->callback([&] {
      command = "weaklimit";
      action = [&] {
        const auto g = Polynomial::parse(g_text);
        const auto t = parse_time(t_text);
        const auto rows = weak_limit_check(g, t, parse_rational_list(c_list_text));
        Outcome o;
        o.params = {{"g", g.to_string()}, {"t", to_string(t.value())}, {"c_list", c_list_text}};
        o.table.header = {"c", "phi", "crossing_integral", "normalized", "target", "abs_error", "rel_error"};
        for (const auto& row : rows) {
          o.table.rows.push_back({to_string(row.c), to_string(row.phi), to_string(row.crossing_integral), to_string(row.normalized),
                                  to_string(row.target), fmt_double(row.abs_error), fmt_double(row.rel_error)});
        }
        return o;
      };
    });
  }
  {
    auto* sub = app.add_subcommand("selftest", "Run the exact identity checks");
    common(sub);
    sub->callback([&] {
      command = "selftest";
      action = [&] {
        Outcome o;
        o.table.header = {"check", "passed", "detail"};
        for (const auto& check : run_selftest()) {
          o.table.rows.push_back({check.name, check.passed ? "true" : "false", check.detail});
          if (!check.passed) o.exit_code = 1;
        }
        return o;
      };
    });
  }

  try {
    std::vector<const char*> expanded;
    for (const auto& a : args) expanded.push_back(a.c_str());
    app.parse(static_cast<int>(expanded.size()), expanded.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << error_json("UsageError", e.what()).dump() << '\n';
    return 1;
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    const Outcome outcome = action();
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    emit(outcome, opts, command, seconds, out);
    return outcome.exit_code;
  } catch (const Error& e) {
    err << error_json(to_string(e.code()), e.what()).dump() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << error_json("InternalError", e.what()).dump() << '\n';
    return 1;
  }
}

}  // namespace peano::cli
