#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace doco {

/// Enough of a loss description to re-evaluate l_t at any comparator point
/// after the run. Linear losses are fully described by the round's recorded
/// gradient; the other kinds carry their own parameters.
struct LossSpec {
  enum class Kind { kLinear, kDistance, kPinball, kSkewedQuadratic };
  Kind kind = Kind::kLinear;
  std::vector<double> optimum;  // kDistance
  double scale = 1.0;           // kDistance
  double r_star = 0.0;          // kPinball / kSkewedQuadratic
  double alpha = 0.1;           // kPinball / kSkewedQuadratic
};

/// One recorded round of the interaction protocol. Scalar learners store
/// 1-element vectors; conformal rounds set r_star and err = 1[r <= r*].
struct LedgerRound {
  std::vector<double> x;  // prediction (or the radius, as a 1-vector)
  std::vector<double> g;  // revealed (sub)gradient
  double lambda_prev = 1.0;
  std::optional<double> loss_value;  // l_t(x_t)
  std::optional<double> r_star;
  std::optional<int> err;
  std::optional<LossSpec> loss;
};

struct LedgerMeta {
  std::string algorithm;
  std::string spec_hash;
  std::uint64_t seed = 0;
  // Free-form numeric hyperparameters (eps, alpha, rule constants, the
  // stream's hidden ceiling, ...). Ordered so serialization is stable.
  std::map<std::string, double> params;
};

struct RunLedger {
  LedgerMeta meta;
  std::vector<LedgerRound> rounds;
};

/// l_t(point) for a recorded round; throws if the round carries no loss spec
/// or the dimensions disagree.
double comparator_loss(const LedgerRound& round, std::span<const double> point);

/// JSON-lines serialization: one meta line followed by one line per round,
/// with a fixed field order (see docs/formats.md). Doubles round-trip
/// exactly.
void write_jsonl(const RunLedger& ledger, const std::filesystem::path& path);
RunLedger read_jsonl(const std::filesystem::path& path);

/// FNV-1a 64-bit hex digest, used to fingerprint configs inside ledgers.
std::string fnv1a_hex(std::string_view text);

}  // namespace doco
