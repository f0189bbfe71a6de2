#pragma once

// Training/evaluation pair generation over a dataset's configured angles.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "angleqa/codec.hpp"
#include "angleqa/slots.hpp"

namespace angleqa {

struct EncodedPair {
  std::string input;
  std::string output;
  std::string instance_id;
  Angle angle;
};

struct SamplerConfig {
  std::uint64_t epochs = 1;
  std::uint64_t seed = 0;
  std::uint64_t max_resample_attempts = 100;
  OrderPolicy policy;

  void validate() const;
};

/// A finite pair stream plus the bookkeeping the generators accumulate.
struct PairStream {
  std::vector<EncodedPair> pairs;
  std::size_t skipped = 0;  // sampler: instances with no applicable angle
                            // enumerator: inapplicable (instance, angle) combos
  std::vector<std::string> warnings;
};

/// True iff every source and target slot has a value in the instance.
bool angle_applicable(const Instance& instance, const Angle& angle) noexcept;

/// Samples one pair for (epoch, index). Returns nullopt when no configured
/// angle applies to the instance. Depends only on (config, epoch, index).
std::optional<EncodedPair> sample_pair(const SlotRegistry& registry,
                                       const Dataset& dataset,
                                       const SamplerConfig& config,
                                       std::uint64_t epoch, std::size_t index);

/// One weighted angle draw per instance per epoch, in dataset order.
/// Throws InvalidConfig (no angles) or NoApplicableAngle (nothing applies to
/// any instance).
PairStream sample_training_pairs(const SlotRegistry& registry,
                                 const Dataset& dataset,
                                 const SamplerConfig& config);

/// Every (instance, applicable angle) pair, instance-major.
PairStream enumerate_all_angles(const SlotRegistry& registry,
                                const Dataset& dataset,
                                const OrderPolicy& policy);

/// Order policy used for a single enumerated (instance, angle) item.
OrderPolicy item_policy(const OrderPolicy& policy, std::uint64_t a,
                        std::uint64_t b, std::uint64_t c = 0);

/// Round-robin over per-dataset streams, one pair from each in turn, stopping
/// when the shortest stream runs out so every dataset contributes equally.
std::vector<EncodedPair> interleave_equally(const std::vector<PairStream>& streams);

/// Line-delimited {"input","output","id","angle"} records.
void write_pairs(std::ostream& os, const SlotRegistry& registry,
                 const std::vector<EncodedPair>& pairs);
std::vector<EncodedPair> read_pairs(std::istream& is, const SlotRegistry& registry);

}  // namespace angleqa
