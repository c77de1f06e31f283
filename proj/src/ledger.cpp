#include "doco/ledger.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "doco/conformal.hpp"
#include "doco/streams.hpp"

namespace doco {

namespace {

using ordered_json = nlohmann::ordered_json;

const char* loss_kind_name(LossSpec::Kind kind) {
  switch (kind) {
    case LossSpec::Kind::kLinear:
      return "linear";
    case LossSpec::Kind::kDistance:
      return "distance";
    case LossSpec::Kind::kPinball:
      return "pinball";
    case LossSpec::Kind::kSkewedQuadratic:
      return "skewed_quadratic";
  }
  throw std::logic_error("loss_kind_name: unreachable");
}

LossSpec::Kind loss_kind_from_name(const std::string& name) {
  if (name == "linear") return LossSpec::Kind::kLinear;
  if (name == "distance") return LossSpec::Kind::kDistance;
  if (name == "pinball") return LossSpec::Kind::kPinball;
  if (name == "skewed_quadratic") return LossSpec::Kind::kSkewedQuadratic;
  throw std::runtime_error("ledger: unknown loss kind '" + name + "'");
}

}  // namespace

double comparator_loss(const LedgerRound& round, std::span<const double> point) {
  if (!round.loss.has_value()) {
    throw std::invalid_argument("comparator_loss: round has no recorded loss spec");
  }
  const LossSpec& spec = *round.loss;
  switch (spec.kind) {
    case LossSpec::Kind::kLinear: {
      if (point.size() != round.g.size()) {
        throw std::domain_error("comparator_loss: dimension mismatch");
      }
      double acc = 0.0;
      for (std::size_t i = 0; i < point.size(); ++i) {
        acc += round.g[i] * point[i];
      }
      return acc;
    }
    case LossSpec::Kind::kDistance: {
      DistanceLoss loss{spec.optimum, spec.scale};
      return loss.value(point);
    }
    case LossSpec::Kind::kPinball: {
      if (point.size() != 1) {
        throw std::domain_error("comparator_loss: radius losses are 1D");
      }
      return pinball_loss(point[0], spec.r_star, spec.alpha).value;
    }
    case LossSpec::Kind::kSkewedQuadratic: {
      if (point.size() != 1) {
        throw std::domain_error("comparator_loss: radius losses are 1D");
      }
      return skewed_quadratic_loss(point[0], spec.r_star, spec.alpha).value;
    }
  }
  throw std::logic_error("comparator_loss: unreachable");
}

void write_jsonl(const RunLedger& ledger, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("write_jsonl: cannot open " + path.string());
  }

  ordered_json meta;
  meta["type"] = "meta";
  meta["algorithm"] = ledger.meta.algorithm;
  meta["spec_hash"] = ledger.meta.spec_hash;
  meta["seed"] = ledger.meta.seed;
  meta["params"] = ordered_json::object();
  for (const auto& [key, value] : ledger.meta.params) {
    meta["params"][key] = value;
  }
  out << meta.dump() << '\n';

  std::int64_t t = 0;
  for (const LedgerRound& round : ledger.rounds) {
    ordered_json row;
    row["t"] = ++t;
    row["x"] = round.x;
    row["g"] = round.g;
    row["lambda_prev"] = round.lambda_prev;
    if (round.loss_value) row["loss_value"] = *round.loss_value;
    if (round.r_star) row["r_star"] = *round.r_star;
    if (round.err) row["err"] = *round.err;
    if (round.loss) {
      ordered_json spec;
      spec["kind"] = loss_kind_name(round.loss->kind);
      switch (round.loss->kind) {
        case LossSpec::Kind::kLinear:
          break;
        case LossSpec::Kind::kDistance:
          spec["optimum"] = round.loss->optimum;
          spec["scale"] = round.loss->scale;
          break;
        case LossSpec::Kind::kPinball:
        case LossSpec::Kind::kSkewedQuadratic:
          spec["r_star"] = round.loss->r_star;
          spec["alpha"] = round.loss->alpha;
          break;
      }
      row["loss"] = std::move(spec);
    }
    out << row.dump() << '\n';
  }
}

RunLedger read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("read_jsonl: cannot open " + path.string());
  }
  RunLedger ledger;
  std::string line;
  bool have_meta = false;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    const ordered_json row = ordered_json::parse(line);
    if (!have_meta) {
      if (row.value("type", "") != "meta") {
        throw std::runtime_error("read_jsonl: first line must be the meta record");
      }
      ledger.meta.algorithm = row.at("algorithm").get<std::string>();
      ledger.meta.spec_hash = row.at("spec_hash").get<std::string>();
      ledger.meta.seed = row.at("seed").get<std::uint64_t>();
      for (const auto& [key, value] : row.at("params").items()) {
        ledger.meta.params[key] = value.get<double>();
      }
      have_meta = true;
      continue;
    }
    LedgerRound round;
    round.x = row.at("x").get<std::vector<double>>();
    round.g = row.at("g").get<std::vector<double>>();
    round.lambda_prev = row.at("lambda_prev").get<double>();
    if (row.contains("loss_value")) round.loss_value = row.at("loss_value").get<double>();
    if (row.contains("r_star")) round.r_star = row.at("r_star").get<double>();
    if (row.contains("err")) round.err = row.at("err").get<int>();
    if (row.contains("loss")) {
      LossSpec spec;
      spec.kind = loss_kind_from_name(row.at("loss").at("kind").get<std::string>());
      switch (spec.kind) {
        case LossSpec::Kind::kLinear:
          break;
        case LossSpec::Kind::kDistance:
          spec.optimum = row.at("loss").at("optimum").get<std::vector<double>>();
          spec.scale = row.at("loss").at("scale").get<double>();
          break;
        case LossSpec::Kind::kPinball:
        case LossSpec::Kind::kSkewedQuadratic:
          spec.r_star = row.at("loss").at("r_star").get<double>();
          spec.alpha = row.at("loss").at("alpha").get<double>();
          break;
      }
      round.loss = std::move(spec);
    }
    ledger.rounds.push_back(std::move(round));
  }
  if (!have_meta) {
    throw std::runtime_error("read_jsonl: empty ledger " + path.string());
  }
  return ledger;
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return std::string(buf);
}

}  // namespace doco
