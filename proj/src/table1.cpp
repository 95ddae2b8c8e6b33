#include "fbnc/table1.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace fbnc {

namespace {

struct CollectSink final : TraceSink {
  std::vector<SlotTrace> slots;
  void on_slot(const SlotTrace& t) override { slots.push_back(t); }
};

std::string id_list(const std::vector<PacketId>& ids) {
  if (ids.empty()) return "-";
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) out += " ";
    out += "p" + std::to_string(ids[i]);
  }
  return out;
}

std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c)
      width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::string cell = row[c];
      cell.resize(width[c], ' ');
      if (c > 0) out += " | ";
      out += cell;
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += "\n";
  }
  return out;
}

}  // namespace

Table1Script table1_script() {
  Table1Script s;
  s.config.lambda = 0.5;  // unused under scripting; kept valid
  s.config.mu = 0.5;
  s.config.receivers = 2;
  s.config.policy = Policy::drop_when_seen;
  s.config.coding = Coding::next_unseen;
  s.config.q = 2;
  s.config.slots = 6;
  s.config.seed = 1;
  s.config.warmup = 0;
  s.arrivals = {1, 1, 1, 0, 1, 0};
  s.receptions = {
      {1, 1, 0, 0, 1, 1},  // receiver A
      {0, 1, 1, 1, 0, 1},  // receiver B
  };
  return s;
}

std::string table1_render() {
  Table1Script script = table1_script();
  Simulator sim(script.config);
  sim.set_detailed(true);
  CollectSink sink;
  sim.run_scripted(script.arrivals, script.receptions, sink);

  std::vector<std::vector<std::string>> rows;
  rows.push_back({"slot", "queue", "sent", "channel", "A decoded",
                  "A seen-only", "B decoded", "B seen-only"});
  for (const auto& t : sink.slots) {
    std::vector<std::string> row;
    row.push_back(std::to_string(t.slot));
    row.push_back(id_list(t.queue_after_arrival));
    row.push_back(t.decision.combo.to_string());
    std::string chan;
    for (std::size_t j = 0; j < t.received.size(); ++j) {
      if (j > 0) chan += " ";
      chan += char('A' + char(j));
      chan += t.received[j] ? '+' : '-';
    }
    row.push_back(chan);
    for (std::size_t j = 0; j < t.received.size(); ++j) {
      const auto& seen = t.seen_sets[j];
      const auto& decoded = t.decoded_sets[j];
      std::vector<PacketId> seen_only;
      std::set_difference(seen.begin(), seen.end(), decoded.begin(),
                          decoded.end(), std::back_inserter(seen_only));
      row.push_back(id_list(decoded));
      row.push_back(id_list(seen_only));
    }
    rows.push_back(std::move(row));
  }
  return render_table(rows);
}

int replay_table1(std::ostream& out, const std::string& golden_path) {
  std::string rendered = table1_render();
  out << rendered;

  std::ifstream in(golden_path, std::ios::binary);
  if (!in) {
    out << "error: cannot open golden transcript: " << golden_path << "\n";
    return 3;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string golden = buf.str();
  if (golden == rendered) return 0;

  out << "mismatch against " << golden_path << ":\n";
  std::istringstream got(rendered), want(golden);
  std::string g, w;
  std::size_t line = 0;
  while (true) {
    bool has_g = bool(std::getline(got, g));
    bool has_w = bool(std::getline(want, w));
    if (!has_g && !has_w) break;
    ++line;
    if (!has_g) g = "<missing>";
    if (!has_w) w = "<missing>";
    if (g != w) {
      out << "  line " << line << ":\n";
      out << "  - " << w << "\n";
      out << "  + " << g << "\n";
    }
  }
  return 3;
}

}  // namespace fbnc
