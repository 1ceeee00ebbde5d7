#include "hypstrata/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "hypstrata/strata.hpp"

namespace hypstrata::cli {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

json roots_json(const RootConfiguration& rc) {
  return json{{"roots", std::vector<double>(rc.roots().begin(), rc.roots().end())},
              {"mults", std::vector<int>(rc.mults().begin(), rc.mults().end())}};
}

std::string roots_text(const RootConfiguration& rc) {
  std::string s;
  for (std::size_t i = 0; i < rc.distinct(); ++i) {
    s += (i ? ", " : "") + fmt(rc.root(i));
    if (rc.mult(i) > 1) s += "^" + std::to_string(rc.mult(i));
  }
  return "(" + s + ")";
}

json events_json(const std::vector<FlowEvent>& events) {
  json out = json::array();
  for (const auto& ev : events) {
    json roots = json::array();
    json xis = json::array();
    for (auto r : ev.roots) roots.push_back(r + 1);
    for (auto x : ev.xis) xis.push_back(x + 1);
    out.push_back({{"kind", to_string(ev.kind)}, {"roots", roots}, {"xis", xis}, {"sigma0", ev.sigma0}});
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DomainError("cannot write " + path.string());
  os << content;
}

void check_pair(int n, int k) {
  if (n < 2 || k < 1 || k > n - 1) throw DomainError("need n >= 2 and 1 <= k <= n-1");
}

}  // namespace

Format parse_format(const std::string& name) {
  if (name == "json") return Format::Json;
  if (name == "text") return Format::Text;
  throw DomainError("unknown format '" + name + "'");
}

std::string CommandResult::render(Format format) const {
  if (format == Format::Text) {
    std::string s = text;
    for (const auto& d : diagnostics)
      if (s.find(d) == std::string::npos) s += "note: " + d + "\n";
    return s;
  }
  json doc{{"status", status()}, {"payload", payload}, {"diagnostics", diagnostics}};
  return doc.dump(2) + "\n";
}

json cv_to_json(const ConfigVector& cv) {
  json entries = json::array();
  for (const auto& e : cv.entries) {
    switch (e.kind) {
      case EntryKind::ClassA: entries.push_back({{"t", "A"}, {"m", e.mult}}); break;
      case EntryKind::ClassB: entries.push_back({{"t", "B"}, {"m", e.mult}}); break;
      case EntryKind::FreeXi: entries.push_back({{"t", "xi"}}); break;
    }
  }
  return json{{"entries", entries}, {"n", cv.n}, {"k", cv.k}};
}

ConfigVector cv_from_json(const json& j) {
  std::vector<CvEntry> entries;
  for (const auto& e : j.at("entries")) {
    const auto t = e.at("t").get<std::string>();
    if (t == "A")
      entries.push_back(CvEntry::a(e.at("m").get<int>()));
    else if (t == "B")
      entries.push_back(CvEntry::b(e.at("m").get<int>()));
    else if (t == "xi")
      entries.push_back(CvEntry::xi());
    else
      throw DomainError("unknown entry type '" + t + "'");
  }
  auto cv = ConfigVector::from_entries(std::move(entries), j.at("k").get<int>());
  if (j.contains("n") && j.at("n").get<int>() != cv.n) throw DomainError("n does not match the multiplicities");
  return cv;
}

json dimension_to_json(const DimensionReport& d) {
  return json{{"excess", d.excess},           {"num_class_b", d.num_class_b}, {"codim", d.codim},
              {"ambient_dim", d.ambient_dim}, {"conv_dim", d.conv_dim}};
}

std::vector<double> parse_doubles(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw DomainError("not a number: '" + item + "'");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos) throw DomainError("not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<int> parse_ints(const std::string& list) {
  std::vector<int> out;
  for (double v : parse_doubles(list)) {
    if (v != static_cast<int>(v)) throw DomainError("not an integer: " + fmt(v));
    out.push_back(static_cast<int>(v));
  }
  return out;
}

RootConfiguration parse_configuration(const std::string& roots, const std::string& mults) {
  auto y = parse_doubles(roots);
  if (y.empty()) throw DomainError("no roots given");
  std::vector<int> m = mults.empty() ? std::vector<int>(y.size(), 1) : parse_ints(mults);
  if (m.size() != y.size()) throw DomainError("roots and mults differ in length");
  return RootConfiguration(std::move(y), std::move(m));
}

CommandResult cmd_enumerate(int n, int k, std::optional<int> dim_filter) {
  check_pair(n, k);
  CommandResult r;
  const auto cvs = enumerate_cvs(n, k, dim_filter);
  std::map<int, int> hist;
  json list = json::array();
  std::ostringstream text;
  for (const auto& cv : cvs) {
    const auto d = dimension(cv);
    ++hist[d.conv_dim];
    list.push_back({{"cv", cv.str()}, {"vector", cv_to_json(cv)}, {"dimension", dimension_to_json(d)}});
    text << cv.str() << "  dim " << d.conv_dim << "  codim " << d.codim << "\n";
  }
  json h = json::object();
  for (const auto& [dim, count] : hist) h[std::to_string(dim)] = count;
  r.payload = {{"n", n}, {"k", k}, {"count", cvs.size()}, {"histogram", h}, {"cvs", list}};
  text << cvs.size() << " vectors; by dimension:";
  for (const auto& [dim, count] : hist) text << " " << dim << ":" << count;
  text << "\n";
  r.text = text.str();
  return r;
}

CommandResult cmd_classify(const RootConfiguration& rc, int k, double tol) {
  check_pair(rc.degree(), k);
  CommandResult r;
  const auto cv = classify(rc, k, tol);
  const auto d = dimension(cv);
  const auto dr = derivative_roots(rc, k);
  r.payload = {{"cv", cv.str()},
               {"vector", cv_to_json(cv)},
               {"dimension", dimension_to_json(d)},
               {"derived_roots", dr.roots}};
  r.text = cv.str() + "  dim " + std::to_string(d.conv_dim) + "\nroots of P^(" + std::to_string(k) + "): " +
           join(dr.roots) + "\n";
  return r;
}

CommandResult cmd_flow(const RootConfiguration& rc, int k, int mover, int direction, const std::string& traj_dir) {
  check_pair(rc.degree(), k);
  if (mover < 1 || static_cast<std::size_t>(mover) > rc.distinct()) throw DomainError("mover index out of range");
  if (direction != 1 && direction != -1) throw DomainError("direction must be 1 or -1");
  CommandResult r;
  const auto res = flow_to_boundary(rc, k, static_cast<std::size_t>(mover - 1), {}, direction);
  const auto rev = reverse_check(res);
  r.payload = {{"start", roots_json(res.start.rc)},
               {"start_cv", res.start.cv.str()},
               {"mover", mover},
               {"direction", direction},
               {"sigma0", res.sigma0},
               {"events", events_json(res.events)},
               {"endpoint", roots_json(res.endpoint)},
               {"endpoint_cv", res.endpoint_cv.str()},
               {"endpoint_vector", cv_to_json(res.endpoint_cv)},
               {"steps", res.steps},
               {"class_b_speed_range", {res.min_class_b_speed, res.max_class_b_speed}},
               {"max_drift", res.max_drift},
               {"reverse_check",
                {{"ok", rev.ok()},
                 {"reentered_cv", rev.reentered_cv ? rev.reentered_cv->str() : ""},
                 {"confluence_xi_rates", rev.confluence_xi_rates}}}};
  std::ostringstream text;
  text << res.start.cv.str() << " " << roots_text(res.start.rc) << "\n";
  text << "sigma0 " << fmt(res.sigma0) << "\n";
  for (const auto& ev : res.events) text << "event " << to_string(ev.kind) << "\n";
  text << res.endpoint_cv.str() << " " << roots_text(res.endpoint) << "\n";
  if (!traj_dir.empty()) {
    const auto path = std::filesystem::path(traj_dir) / "flow.csv";
    write_file(path, res.trajectory.to_csv());
    r.payload["trajectory"] = path.string();
  }
  r.text = text.str();
  return r;
}

CommandResult cmd_retract(const RootConfiguration& rc, int k, MoverPolicy policy, std::uint64_t seed,
                          const std::string& traj_dir) {
  check_pair(rc.degree(), k);
  CommandResult r;
  const auto res = retract(rc, k, policy, seed);
  json chain = json::array();
  std::ostringstream text;
  for (const auto& link : res.chain) {
    chain.push_back({{"cv", link.cv.str()}, {"point", roots_json(link.rc)}});
    text << link.cv.str() << " " << roots_text(link.rc) << "\n";
  }
  json legs = json::array();
  for (std::size_t i = 0; i < res.legs.size(); ++i) {
    const auto& leg = res.legs[i];
    json l{{"mover", leg.start.mover + 1},
           {"direction", leg.start.direction},
           {"sigma0", leg.sigma0},
           {"events", events_json(leg.events)}};
    if (!traj_dir.empty()) {
      const auto path = std::filesystem::path(traj_dir) / ("leg_" + std::to_string(i + 1) + ".csv");
      write_file(path, leg.trajectory.to_csv());
      l["trajectory"] = path.string();
    }
    legs.push_back(std::move(l));
  }
  r.payload = {{"policy", to_string(policy)},
               {"target", res.target ? res.target->str() : ""},
               {"chain", chain},
               {"legs", legs},
               {"final_cv", res.final().cv.str()},
               {"final", roots_json(res.final().rc)}};
  r.text = text.str();
  return r;
}

CommandResult cmd_poset(int n, int k, const std::string& out) {
  check_pair(n, k);
  CommandResult r;
  const auto poset = build_poset(n, k);
  const auto problems = poset.check();
  const auto dot = poset.to_dot();
  r.payload = {{"n", n},
               {"k", k},
               {"nodes", poset.nodes.size()},
               {"edges", poset.edges.size()},
               {"max_dim", poset.max_dim()},
               {"violations", problems}};
  if (!out.empty()) {
    write_file(out, dot);
    r.payload["dot_file"] = out;
    r.text = std::to_string(poset.nodes.size()) + " nodes, " + std::to_string(poset.edges.size()) + " edges -> " + out + "\n";
  } else {
    r.payload["dot"] = dot;
    r.text = dot;
  }
  for (const auto& p : problems) r.diagnostics.push_back(p);
  if (!problems.empty()) r.exit_code = kExitVerification;
  return r;
}

CommandResult cmd_verify(const std::string& suite, const VerifyOptions& opts) {
  CommandResult r;
  const auto rep = run_suite(suite, opts);
  json props = json::array();
  std::ostringstream text;
  for (const auto& p : rep.properties) {
    props.push_back({{"name", p.name},
                     {"pass", p.pass},
                     {"worst", p.worst},
                     {"checked", p.checked},
                     {"skipped", p.skipped},
                     {"failures", p.failures}});
    text << (p.pass ? "PASS " : "FAIL ") << p.name << "  worst " << fmt(p.worst) << "  checked " << p.checked;
    if (p.skipped) text << "  skipped " << p.skipped;
    text << "\n";
    for (const auto& f : p.failures) {
      text << "    " << f << "\n";
      r.diagnostics.push_back(p.name + ": " + f);
    }
  }
  r.payload = {{"suite", rep.suite},
               {"n_max", opts.n_max},
               {"samples", opts.samples},
               {"seed", opts.seed},
               {"pass", rep.ok()},
               {"properties", props}};
  r.text = text.str();
  if (!rep.ok()) r.exit_code = kExitVerification;
  return r;
}

}  // namespace hypstrata::cli
