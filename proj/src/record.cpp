#include "cpd/record.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace cpd {

namespace fs = std::filesystem;

namespace {

constexpr const char *kTrajectoryMagic = "# cpd-trajectory 1";

double parse_double(const std::string &token) {
  double v = 0.0;
  const char *first = token.data();
  const char *last = first + token.size();
  if (!token.empty() && token[0] == '+')
    ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw ConfigError("bad number '" + token + "'");
  return v;
}

std::size_t parse_size(const std::string &token) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw ConfigError("bad integer '" + token + "'");
  return v;
}

std::ofstream open_out(const fs::path &path) {
  std::ofstream out(path);
  if (!out)
    throw ConfigError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot read " + path.string());
  return in;
}

// "key=value key=value" header fields.
std::map<std::string, std::string> header_fields(const std::string &line) {
  std::map<std::string, std::string> out;
  std::istringstream ss(line.substr(1));
  std::string token;
  while (ss >> token) {
    const auto eq = token.find('=');
    if (eq != std::string::npos)
      out[token.substr(0, eq)] = token.substr(eq + 1);
  }
  return out;
}

CheckStatus status_from_string(const std::string &s) {
  for (CheckStatus c : {CheckStatus::pass, CheckStatus::fail, CheckStatus::skipped, CheckStatus::info})
    if (s == to_string(c))
      return c;
  throw ConfigError("unknown check status '" + s + "'");
}

void write_diagnostics(const std::vector<DiagnosticReport> &reports, std::ostream &out) {
  for (const DiagnosticReport &r : reports) {
    out << r.name << ".status=" << to_string(r.status) << '\n';
    out << r.name << ".measured=" << format_double(r.measured) << '\n';
    out << r.name << ".threshold=" << format_double(r.threshold) << '\n';
    out << r.name << ".violations=" << r.violations << '\n';
    if (r.frame)
      out << r.name << ".frame=" << *r.frame << '\n';
    if (r.particle)
      out << r.name << ".particle=" << *r.particle << '\n';
    if (!r.note.empty())
      out << r.name << ".note=" << r.note << '\n';
  }
}

std::vector<DiagnosticReport> read_diagnostics(std::istream &in) {
  std::vector<DiagnosticReport> reports;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (line.empty() || line[0] == '#' || eq == std::string::npos)
      continue;
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    const auto dot_pos = key.rfind('.');
    if (dot_pos == std::string::npos)
      continue;
    const std::string name = key.substr(0, dot_pos);
    const std::string what = key.substr(dot_pos + 1);
    if (reports.empty() || reports.back().name != name) {
      reports.emplace_back();
      reports.back().name = name;
    }
    DiagnosticReport &r = reports.back();
    if (what == "status")
      r.status = status_from_string(value);
    else if (what == "measured")
      r.measured = parse_double(value);
    else if (what == "threshold")
      r.threshold = parse_double(value);
    else if (what == "violations")
      r.violations = parse_size(value);
    else if (what == "frame")
      r.frame = parse_size(value);
    else if (what == "particle")
      r.particle = parse_size(value);
    else if (what == "note")
      r.note = value;
  }
  return reports;
}

} // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

double outer_fraction(const Frame &frame, Vec2 center, double radius) {
  if (frame.positions.empty())
    return 0.0;
  std::size_t count = 0;
  for (const Vec2 &x : frame.positions)
    count += norm(x - center) > radius;
  return static_cast<double>(count) / static_cast<double>(frame.positions.size());
}

double color_inversion_fraction(const Trajectory &trajectory, const ColorRule &rule) {
  if (trajectory.frames.empty())
    return 0.0;
  const Frame &first = trajectory.frames.front();
  const Frame &last = trajectory.frames.back();
  std::vector<double> red;
  std::vector<double> blue;
  for (std::size_t i = 0; i < first.positions.size(); ++i)
    (rule.red(first.positions[i]) ? red : blue).push_back(rule.ordering(last.positions[i]));
  if (red.empty() || blue.empty())
    return 0.0;
  std::sort(blue.begin(), blue.end());
  std::size_t inverted = 0;
  for (double r : red)
    inverted += static_cast<std::size_t>(std::lower_bound(blue.begin(), blue.end(), r) - blue.begin());
  return static_cast<double>(inverted) / (static_cast<double>(red.size()) * static_cast<double>(blue.size()));
}

std::vector<DiagnosticReport> run_diagnostics(const ScenarioConfig &config, const Trajectory &trajectory) {
  const DomainGeometry domain = build_domain(config.domain);
  const EnergyModel model = build_model(config.potential);
  const bool projected = trajectory.config.scheme == Scheme::projected_rk4;

  std::vector<DiagnosticReport> reports;
  if (!trajectory.completed) {
    DiagnosticReport r;
    r.name = "completed";
    r.status = CheckStatus::fail;
    r.note = trajectory.error;
    reports.push_back(r);
  }
  reports.push_back(check_energy_decay(trajectory));
  reports.push_back(check_separation(trajectory, model));
  reports.push_back(check_confinement(trajectory, domain));
  if (projected) {
    reports.push_back(check_boundary_sign(trajectory, domain, model));
    reports.push_back(check_detachment_tangency(detect_contact_events(trajectory, domain, model)));
  }
  reports.push_back(velocity_bound_check(trajectory));
  reports.push_back(check_penetration_bound(trajectory, domain));
  reports.push_back(mild_residual_report(trajectory, domain, model));

  DiagnosticReport mixing;
  mixing.name = "color_inversion";
  mixing.status = CheckStatus::info;
  mixing.measured = color_inversion_fraction(trajectory, config.color);
  mixing.threshold = std::numeric_limits<double>::infinity();
  reports.push_back(mixing);

  if (config.domain.shape == DomainSpec::Shape::disk && !trajectory.frames.empty()) {
    DiagnosticReport crowd;
    crowd.name = "outer_fraction";
    crowd.status = CheckStatus::info;
    crowd.measured = outer_fraction(trajectory.frames.back(), config.domain.center, 0.8 * config.domain.radius);
    crowd.threshold = 0.36; // 1 - 0.8^2
    crowd.note = "share of particles beyond 0.8 R at the final frame; uniform density gives the threshold";
    reports.push_back(crowd);
  }
  return reports;
}

bool all_enabled_pass(const std::vector<DiagnosticReport> &reports) {
  return std::none_of(reports.begin(), reports.end(), [](const DiagnosticReport &r) { return r.failed(); });
}

ScenarioRecord run_scenario(const ScenarioConfig &config) {
  config.validate();
  const DomainGeometry domain = build_domain(config.domain);
  const EnergyModel model = build_model(config.potential);
  ScenarioRecord record;
  record.config = config;
  record.trajectory = simulate(domain, model, sample_initial(config), config.integrator, config.T);
  record.diagnostics = run_diagnostics(config, record.trajectory);
  if (!config.output_dir.empty())
    write_record(record, config.output_dir);
  return record;
}

void write_record(const ScenarioRecord &record, const fs::path &dir) {
  fs::create_directories(dir);
  save_scenario(record.config, (dir / "config.json").string());

  const Trajectory &traj = record.trajectory;
  const IntegratorConfig &ic = traj.config;
  {
    std::ofstream out = open_out(dir / "trajectory.txt");
    out << kTrajectoryMagic << '\n';
    out << "# scheme=" << to_string(ic.scheme) << " dt=" << format_double(ic.dt)
        << " penalty_k=" << format_double(ic.penalty_k) << " contact_tolerance=" << format_double(ic.contact_tolerance)
        << " record_every=" << ic.record_every << " stability_factor=" << format_double(ic.stability_factor) << '\n';
    out << "# completed=" << (traj.completed ? 1 : 0) << '\n';
    if (!traj.completed)
      out << "# error " << traj.error << '\n';
    out << "frame t particle x y on_boundary\n";
    for (std::size_t m = 0; m < traj.frames.size(); ++m) {
      const Frame &f = traj.frames[m];
      const std::string t = format_double(f.time);
      for (std::size_t i = 0; i < f.positions.size(); ++i)
        out << m << ' ' << t << ' ' << i << ' ' << format_double(f.positions[i].x) << ' '
            << format_double(f.positions[i].y) << ' ' << static_cast<int>(f.on_boundary[i]) << '\n';
    }
  }
  {
    std::ofstream out = open_out(dir / "summary.txt");
    out << "frame t energy min_separation step max_force\n";
    for (std::size_t m = 0; m < traj.frames.size(); ++m) {
      const Frame &f = traj.frames[m];
      out << m << ' ' << format_double(f.time) << ' ' << format_double(f.energy) << ' '
          << format_double(f.min_separation) << ' ' << f.step << ' ' << format_double(f.max_force) << '\n';
    }
    for (const DiagnosticReport &r : record.diagnostics)
      out << "# check " << r.name << ' ' << to_string(r.status) << ' ' << format_double(r.measured) << ' '
          << format_double(r.threshold) << '\n';
  }
  {
    std::ofstream out = open_out(dir / "diagnostics.txt");
    write_diagnostics(record.diagnostics, out);
  }
}

ScenarioRecord read_record(const fs::path &path) {
  const fs::path dir = fs::is_directory(path) ? path : path.parent_path();
  ScenarioRecord record;
  record.config = load_scenario((dir / "config.json").string());

  Trajectory &traj = record.trajectory;
  {
    std::ifstream in = open_in(dir / "trajectory.txt");
    std::string line;
    if (!std::getline(in, line) || line != kTrajectoryMagic)
      throw ConfigError("not a trajectory file: " + (dir / "trajectory.txt").string());
    while (in.peek() == '#' && std::getline(in, line)) {
      if (line.rfind("# error ", 0) == 0) {
        traj.error = line.substr(8);
        continue;
      }
      const auto fields = header_fields(line);
      if (auto it = fields.find("scheme"); it != fields.end()) {
        traj.config.scheme = scheme_from_string(it->second);
        traj.config.dt = parse_double(fields.at("dt"));
        traj.config.penalty_k = parse_double(fields.at("penalty_k"));
        traj.config.contact_tolerance = parse_double(fields.at("contact_tolerance"));
        traj.config.record_every = parse_size(fields.at("record_every"));
        traj.config.stability_factor = parse_double(fields.at("stability_factor"));
      }
      if (auto it = fields.find("completed"); it != fields.end())
        traj.completed = it->second == "1";
    }
    std::getline(in, line); // column header
    std::string sm, st, si, sx, sy, sb;
    while (in >> sm >> st >> si >> sx >> sy >> sb) {
      const std::size_t m = parse_size(sm);
      const std::size_t i = parse_size(si);
      if (m == traj.frames.size()) {
        traj.frames.emplace_back();
        traj.frames.back().time = parse_double(st);
      }
      if (m + 1 != traj.frames.size() || i != traj.frames.back().positions.size())
        throw ConfigError("trajectory rows out of order at frame " + sm + " particle " + si);
      Frame &f = traj.frames.back();
      f.positions.push_back({parse_double(sx), parse_double(sy)});
      f.on_boundary.push_back(sb == "1" ? 1 : 0);
    }
  }
  {
    std::ifstream in = open_in(dir / "summary.txt");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#')
        continue;
      std::istringstream ss(line);
      std::string sm, st, se, sd, ss_step, sf;
      ss >> sm >> st >> se >> sd >> ss_step >> sf;
      const std::size_t m = parse_size(sm);
      if (m >= traj.frames.size())
        throw ConfigError("summary refers to missing frame " + sm);
      Frame &f = traj.frames[m];
      f.energy = parse_double(se);
      f.min_separation = parse_double(sd);
      f.step = parse_size(ss_step);
      f.max_force = parse_double(sf);
    }
  }
  if (fs::exists(dir / "diagnostics.txt")) {
    std::ifstream in = open_in(dir / "diagnostics.txt");
    record.diagnostics = read_diagnostics(in);
  }
  return record;
}

} // namespace cpd
