#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace cfisac {

enum class Direction { kApToCs, kCsToAp, kBroadcast };

enum class Phase {
  kMetricExchange,   // M(a) uplink
  kMetricBroadcast,  // sum of metrics back to each AP
  kUtilityReport,    // (alpha~, Delta~) uplink
  kPsrAssignment,    // rho* downlink
  kAdmmInit,         // gamma^[0], psi^[0] downlink
  kAdmmUplink,       // gamma_a, psi_au uplink per iteration
  kAdmmDownlink,     // gamma, psi downlink per iteration
  kCsiUpload,        // H_a and target steering to the CS
  kBfDownload,       // W_a back to the AP
};

std::string_view to_string(Direction d);
std::string_view to_string(Phase p);

enum class Algorithm { kSplitOpt, kJointOpt, kCentralized };

std::string_view to_string(Algorithm a);

/// Shape of a payload; a complex entry counts as two real scalars.
struct PayloadDescriptor {
  int rows = 1;
  int cols = 1;
  bool is_complex = false;

  std::int64_t scalar_count() const {
    return static_cast<std::int64_t>(rows) * cols * (is_complex ? 2 : 1);
  }
};

inline constexpr int kCentralServer = -1;

struct Message {
  int ap = 0;  // the AP end of the link
  Direction direction = Direction::kApToCs;
  Phase phase = Phase::kMetricExchange;
  int iteration = 0;
  PayloadDescriptor descriptor;
  std::vector<double> data;  // real scalars; complex values interleaved (re, im)

  std::int64_t scalar_count() const { return descriptor.scalar_count(); }
  int sender() const { return direction == Direction::kApToCs ? ap : kCentralServer; }
  int recipient() const { return direction == Direction::kApToCs ? kCentralServer : ap; }
};

struct Receipt {
  std::uint64_t sequence = 0;
  std::int64_t scalars = 0;
};

struct LedgerEntry {
  int ap = 0;
  Phase phase = Phase::kMetricExchange;
  Direction direction = Direction::kApToCs;
  std::int64_t scalars = 0;
  int iteration = 0;
};

/// Per-AP, per-phase, per-direction real-scalar totals.
class FronthaulLedger {
 public:
  void record(const Message& m);

  const std::vector<LedgerEntry>& entries() const { return entries_; }
  std::int64_t total() const;
  std::int64_t total(int ap) const;
  std::int64_t total(int ap, Phase phase) const;
  std::int64_t total(int ap, Phase phase, Direction direction) const;
  std::vector<int> aps() const;
  /// Highest iteration tag recorded for a phase (0 if none).
  int max_iteration(Phase phase) const;

  void write_csv(const std::filesystem::path& path) const;

 private:
  std::vector<LedgerEntry> entries_;
};

/// In-process AP <-> CS message bus. All optimizer traffic goes through it;
/// the ledger is updated as part of each send.
class FronthaulBus {
 public:
  Receipt send(Message m);

  /// Drains the recipient's mailbox for one phase, ordered by
  /// (phase, sender index, send sequence).
  std::vector<Message> receive(int recipient, Phase phase);

  const FronthaulLedger& ledger() const { return ledger_; }
  std::size_t pending() const;

 private:
  struct Queued {
    std::uint64_t sequence;
    Message message;
  };
  std::map<int, std::deque<Queued>> mailboxes_;
  FronthaulLedger ledger_;
  std::uint64_t next_sequence_ = 0;
};

Message make_real_message(int ap, Direction d, Phase p, std::vector<double> values,
                          int iteration = 0);

struct FronthaulSummary {
  Algorithm algorithm = Algorithm::kSplitOpt;
  std::map<int, std::int64_t> table_scalars;  // per AP, scalars in the overhead-table sense
  std::map<int, std::int64_t> all_scalars;    // per AP, everything recorded
  int iterations = 0;                         // ADMM iterations seen (JointOpt)

  /// Table count of one AP (all APs carry the same count in every algorithm).
  std::int64_t per_ap() const;
};

/// Phases that enter the per-AP overhead table for each algorithm: SplitOpt
/// counts M(a), alpha~, Delta~, rho*; JointOpt counts the per-iteration
/// (gamma, psi) downlink; the centralized baseline counts CSI up and W down.
bool counted_in_table(Algorithm a, Phase p);

FronthaulSummary summarize(const FronthaulLedger& ledger, Algorithm algorithm);

}  // namespace cfisac
