#include "slicing/csv.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace slicing {

std::string format_double(double x) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc{}) throw std::runtime_error("cannot format number");
  return std::string(buf.data(), end);
}

namespace {

std::string uid(UserId id) { return std::to_string(id.value); }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace

std::string slots_csv(const RunResult& r) {
  const auto& scn = r.scenario;
  std::vector<const SliceSpec*> rll_slices, sm_slices;
  for (const auto& s : scn.slices) (s.is_rll() ? rll_slices : sm_slices).push_back(&s);
  std::vector<UserId> rll_users, all_users;
  for (const auto& u : scn.users) {
    all_users.push_back(u.id);
    if (scn.slices[u.slice].is_rll()) rll_users.push_back(u.id);
  }

  std::ostringstream os;
  os << "slot";
  for (const auto& s : scn.slices) os << ",served:" << s.id;
  for (const auto& s : scn.slices) os << ",mean_user_rate:" << s.id;
  for (const auto* s : rll_slices) os << ",reliability:" << s->id;
  for (const auto* s : sm_slices) os << ",F:" << s->id;
  for (auto id : rll_users) os << ",G:" << uid(id);
  for (auto id : rll_users) os << ",y:" << uid(id);
  for (auto id : all_users) os << ",rate:" << uid(id);
  for (auto id : all_users) os << ",lambda:" << uid(id);
  os << ",total_power_w,fixed_point_residual\n";

  for (const auto& m : r.slots) {
    os << m.slot;
    for (const auto& s : scn.slices) os << ',' << format_double(m.served_bps.at(s.id));
    for (const auto& s : scn.slices) os << ',' << format_double(m.mean_user_rate_bps.at(s.id));
    for (const auto* s : rll_slices) {
      os << ',';
      if (const auto it = m.reliability.find(s->id); it != m.reliability.end()) {
        os << format_double(it->second);
      }
    }
    for (const auto* s : sm_slices) os << ',' << format_double(m.queues.f.at(s->id));
    for (auto id : rll_users) os << ',' << format_double(m.queues.g.at(id));
    for (auto id : rll_users) {
      os << ',';
      if (const auto it = m.y.find(id); it != m.y.end()) os << format_double(it->second);
    }
    for (auto id : all_users) os << ',' << format_double(m.rate_bps.at(id));
    for (auto id : all_users) os << ',' << format_double(m.lambda.at(id));
    os << ',' << format_double(m.total_power_w) << ',' << format_double(m.fixed_point_residual)
       << '\n';
  }
  return os.str();
}

std::string summary_csv(const RunResult& r) {
  const auto& s = r.summary;
  std::ostringstream os;
  os << "key,value\n";
  os << "window_begin," << s.window_begin << '\n';
  os << "window_end," << s.window_end << '\n';
  os << "mean_power_w," << format_double(s.mean_power_w) << '\n';
  for (const auto& sl : r.scenario.slices) {
    if (const auto it = s.mean_served_bps.find(sl.id); it != s.mean_served_bps.end()) {
      os << "mean_served_bps:" << sl.id << ',' << format_double(it->second) << '\n';
    }
  }
  for (const auto& sl : r.scenario.slices) {
    if (const auto it = s.mean_user_rate_bps.find(sl.id); it != s.mean_user_rate_bps.end()) {
      os << "mean_user_rate_bps:" << sl.id << ',' << format_double(it->second) << '\n';
    }
  }
  for (const auto& [id, v] : s.final_reliability) {
    os << "final_reliability:" << id << ',' << format_double(v) << '\n';
  }
  for (const auto& [id, v] : s.stability) {
    os << "stability:" << id << ',' << format_double(v) << '\n';
  }
  os << "drift_inequality_held," << (s.drift_inequality_held ? 1 : 0) << '\n';
  os << "g_nonnegative," << (s.g_nonnegative ? 1 : 0) << '\n';
  return os.str();
}

std::string isolation_csv(const IsolationReport& rep) {
  std::ostringstream os;
  os << "event_slot,window,slice,metric,perturbed,pre_mean,post_mean,relative_change,"
        "max_excursion,excursion_slots\n";
  for (const auto& row : rep.rows) {
    os << rep.event_slot << ',' << rep.window << ',' << row.slice << ',' << row.metric << ','
       << (row.perturbed ? 1 : 0) << ',' << format_double(row.pre_mean) << ','
       << format_double(row.post_mean) << ',' << format_double(row.relative_change) << ','
       << format_double(row.max_excursion) << ',' << row.excursion_slots << '\n';
  }
  return os.str();
}

void emit_csv(const RunResult& r, const std::filesystem::path& dir,
              const std::optional<IsolationReport>& isolation) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + dir.string() + "': " + ec.message());
  write_file(dir / "slots.csv", slots_csv(r));
  write_file(dir / "summary.csv", summary_csv(r));
  if (isolation) write_file(dir / "isolation_report.csv", isolation_csv(*isolation));
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::out_of_range("no column '" + name + "'");
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ls(l);
    while (std::getline(ls, cell, ',')) out.push_back(cell);
    if (!l.empty() && l.back() == ',') out.emplace_back();
    return out;
  };
  if (std::getline(in, line)) t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split(line));
  }
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

}  // namespace slicing
