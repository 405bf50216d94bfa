#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ladder/losses.hpp"

namespace ladder {

struct ParseError : std::runtime_error {
  ParseError(std::string msg, long line)
      : std::runtime_error(std::move(msg) + " (line " + std::to_string(line) +
                           ")"),
        line(line) {}
  long line = 0;
};

// One record of the append-only competition log.
struct Event {
  int v = 1;
  long seq = 0;
  long ts = 0;  // caller-supplied, kept for replay fidelity
  std::string team;
  std::string digest;                // sha256 hex of the canonical label bytes
  std::optional<double> score;       // reported score, on the mechanism grid

  nlohmann::json to_json() const;
  static Event from_json(const nlohmann::json& j);
};

std::string sha256_hex(std::string_view bytes);

// Canonical byte form of a label vector: newline-separated shortest decimal
// labels, no header, trailing newline. Digests are computed over this form.
std::string canonical_bytes(const LabelVector& labels);
LabelVector labels_from_canonical(std::string_view bytes);

// Parses a submission file: optional "id,label" header, then either one
// label per line or "id,label" pairs with ids 0..n-1 in any order.
// `alphabet` empty means any real in [0,1] is a legal label.
LabelVector parse_submission_file(std::string_view bytes, long expected_n,
                                  const std::vector<double>& alphabet);

// Seeded sampling without replacement; |public| = round(fraction * n).
std::pair<std::vector<int>, std::vector<int>> split_assign(
    long n_total, double public_fraction, std::uint64_t seed);

struct ReadLogResult {
  std::vector<Event> events;
  bool torn_tail = false;  // trailing partial record was dropped
};

// Reads a JSONL event log. A torn trailing line is excluded and flagged;
// a corrupt record anywhere else is a hard error naming the record index.
ReadLogResult read_log(const std::filesystem::path& path);

// Single-appender JSONL event log. Sequence numbers must increase by one.
class EventLog {
 public:
  static EventLog open(const std::filesystem::path& path, bool fsync = false);

  void append(const Event& e);
  long last_seq() const { return last_seq_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  bool fsync_ = false;
  long last_seq_ = 0;
};

// Content-addressed blob directory; files named by hex digest.
class BlobStore {
 public:
  explicit BlobStore(std::filesystem::path dir);

  std::string put(std::string_view bytes);  // returns digest
  std::string get(const std::string& digest) const;
  bool has(const std::string& digest) const;

 private:
  std::filesystem::path dir_;
};

}  // namespace ladder
