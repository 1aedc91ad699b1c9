#include "cfisac/fronthaul.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

namespace cfisac {

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::kApToCs: return "ap_to_cs";
    case Direction::kCsToAp: return "cs_to_ap";
    case Direction::kBroadcast: return "broadcast";
  }
  return "?";
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::kMetricExchange: return "metric_exchange";
    case Phase::kMetricBroadcast: return "metric_broadcast";
    case Phase::kUtilityReport: return "utility_report";
    case Phase::kPsrAssignment: return "psr_assignment";
    case Phase::kAdmmInit: return "admm_init";
    case Phase::kAdmmUplink: return "admm_uplink";
    case Phase::kAdmmDownlink: return "admm_downlink";
    case Phase::kCsiUpload: return "csi_upload";
    case Phase::kBfDownload: return "bf_download";
  }
  return "?";
}

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kSplitOpt: return "splitopt";
    case Algorithm::kJointOpt: return "jointopt";
    case Algorithm::kCentralized: return "centralized";
  }
  return "?";
}

void FronthaulLedger::record(const Message& m) {
  entries_.push_back({m.ap, m.phase, m.direction, m.scalar_count(), m.iteration});
}

std::int64_t FronthaulLedger::total() const {
  std::int64_t t = 0;
  for (const auto& e : entries_) t += e.scalars;
  return t;
}

std::int64_t FronthaulLedger::total(int ap) const {
  std::int64_t t = 0;
  for (const auto& e : entries_) {
    if (e.ap == ap) t += e.scalars;
  }
  return t;
}

std::int64_t FronthaulLedger::total(int ap, Phase phase) const {
  std::int64_t t = 0;
  for (const auto& e : entries_) {
    if (e.ap == ap && e.phase == phase) t += e.scalars;
  }
  return t;
}

std::int64_t FronthaulLedger::total(int ap, Phase phase, Direction direction) const {
  std::int64_t t = 0;
  for (const auto& e : entries_) {
    if (e.ap == ap && e.phase == phase && e.direction == direction) t += e.scalars;
  }
  return t;
}

std::vector<int> FronthaulLedger::aps() const {
  std::set<int> s;
  for (const auto& e : entries_) s.insert(e.ap);
  return {s.begin(), s.end()};
}

int FronthaulLedger::max_iteration(Phase phase) const {
  int t = 0;
  for (const auto& e : entries_) {
    if (e.phase == phase) t = std::max(t, e.iteration);
  }
  return t;
}

void FronthaulLedger::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "ap_id,phase,direction,scalars,iteration\n";
  for (const auto& e : entries_) {
    out << e.ap << ',' << to_string(e.phase) << ',' << to_string(e.direction) << ','
        << e.scalars << ',' << e.iteration << '\n';
  }
}

Receipt FronthaulBus::send(Message m) {
  if (m.descriptor.rows < 0 || m.descriptor.cols < 0 ||
      static_cast<std::int64_t>(m.data.size()) != m.descriptor.scalar_count()) {
    throw std::invalid_argument("malformed payload: descriptor announces " +
                                std::to_string(m.descriptor.scalar_count()) +
                                " scalars, payload carries " + std::to_string(m.data.size()));
  }
  if (m.ap < 0) throw std::invalid_argument("message must name the AP end of the link");
  const Receipt r{next_sequence_++, m.scalar_count()};
  ledger_.record(m);
  const int to = m.recipient();
  mailboxes_[to].push_back({r.sequence, std::move(m)});
  return r;
}

std::vector<Message> FronthaulBus::receive(int recipient, Phase phase) {
  auto& box = mailboxes_[recipient];
  std::vector<Queued> taken;
  std::deque<Queued> kept;
  for (auto& q : box) {
    if (q.message.phase == phase) {
      taken.push_back(std::move(q));
    } else {
      kept.push_back(std::move(q));
    }
  }
  box = std::move(kept);
  std::sort(taken.begin(), taken.end(), [](const Queued& a, const Queued& b) {
    if (a.message.sender() != b.message.sender()) return a.message.sender() < b.message.sender();
    return a.sequence < b.sequence;
  });
  std::vector<Message> out;
  out.reserve(taken.size());
  for (auto& q : taken) out.push_back(std::move(q.message));
  return out;
}

std::size_t FronthaulBus::pending() const {
  std::size_t n = 0;
  for (const auto& [k, box] : mailboxes_) n += box.size();
  return n;
}

Message make_real_message(int ap, Direction d, Phase p, std::vector<double> values,
                          int iteration) {
  Message m;
  m.ap = ap;
  m.direction = d;
  m.phase = p;
  m.iteration = iteration;
  m.descriptor = {static_cast<int>(values.size()), 1, false};
  m.data = std::move(values);
  return m;
}

bool counted_in_table(Algorithm a, Phase p) {
  switch (a) {
    case Algorithm::kSplitOpt:
      return p == Phase::kMetricExchange || p == Phase::kUtilityReport ||
             p == Phase::kPsrAssignment;
    case Algorithm::kJointOpt:
      return p == Phase::kAdmmDownlink;
    case Algorithm::kCentralized:
      return p == Phase::kCsiUpload || p == Phase::kBfDownload;
  }
  return false;
}

std::int64_t FronthaulSummary::per_ap() const {
  return table_scalars.empty() ? 0 : table_scalars.begin()->second;
}

FronthaulSummary summarize(const FronthaulLedger& ledger, Algorithm algorithm) {
  FronthaulSummary s;
  s.algorithm = algorithm;
  for (int ap : ledger.aps()) {
    s.table_scalars[ap] = 0;
    s.all_scalars[ap] = 0;
  }
  for (const auto& e : ledger.entries()) {
    s.all_scalars[e.ap] += e.scalars;
    if (counted_in_table(algorithm, e.phase)) s.table_scalars[e.ap] += e.scalars;
  }
  if (algorithm == Algorithm::kJointOpt) s.iterations = ledger.max_iteration(Phase::kAdmmDownlink);
  return s;
}

}  // namespace cfisac
