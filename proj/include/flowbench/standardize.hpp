#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "flowbench/csv.hpp"
#include "flowbench/flow.hpp"

namespace flowbench {

// Raw-to-unified column mapping. Keys are raw header names, values are
// unified column names. `required` lists unified fields that must be mapped;
// of Attack/Label at least one must be present, the other is derived.
struct UnifiedSchema {
   std::map<std::string, std::string> column_map;
   std::set<std::string> required;

   static UnifiedSchema identity(); // unified CSV in, unified CSV out
   static std::set<std::string> default_required();
};

// Port -> application id table used when a source lacks L7_PROTO.
// Destination port takes precedence over source port; 0 means unknown.
struct L7PortMap {
   struct Key {
      uint16_t port;
      uint8_t protocol;
      bool operator<(const Key& o) const
      {
         return port != o.port ? port < o.port : protocol < o.protocol;
      }
   };
   std::map<Key, int64_t> ids;

   static L7PortMap defaults();
   std::optional<int64_t> lookup(uint16_t port, uint8_t protocol) const;
};

int64_t engineer_l7(uint16_t src_port, uint16_t dst_port, uint8_t protocol,
                    const L7PortMap& map);

// Everything needed to ingest one source dataset.
struct MappingConfig {
   std::string dataset_source;
   UnifiedSchema schema = UnifiedSchema::identity();
   AttackTaxonomy taxonomy = AttackTaxonomy::defaults();
   L7PortMap l7 = L7PortMap::defaults();

   static MappingConfig from_json_file(const std::string& path);
   static MappingConfig from_json_text(const std::string& text);
};

struct StandardizeResult {
   std::vector<FlowRecord> records;
   size_t skipped = 0;
   std::vector<std::string> skip_samples; // first few reasons, for diagnostics
};

// Maps raw rows onto validated FlowRecords. Malformed rows are skipped and
// counted; a skip rate above 1% aborts with an error. Missing required
// columns abort naming the first missing field.
StandardizeResult standardize_dataset(const csv::Table& rows, const UnifiedSchema& schema,
                                      const AttackTaxonomy& taxonomy,
                                      const std::string& dataset_source,
                                      const L7PortMap& l7 = L7PortMap::defaults());
StandardizeResult standardize_dataset(const csv::Table& rows, const MappingConfig& cfg);

// Feature values extracted from records by unified column name.
double feature_value(const FlowRecord& r, const std::string& name);
const std::vector<std::string>& default_feature_names();

struct FeatureMatrix {
   std::vector<std::string> names;
   std::vector<std::vector<double>> rows;
};

FeatureMatrix extract_features(const std::vector<FlowRecord>& records,
                               const std::vector<std::string>& names);

// Train-set feature moments. Population standard deviation; a constant
// feature stores stdev 1 so scaling maps it to exactly zero.
struct ScalerStats {
   std::vector<std::string> feature_names;
   std::vector<double> mean;
   std::vector<double> stdev;

   std::string to_json() const;
   static ScalerStats from_json(const std::string& text);
   void save(const std::string& path) const;
   static ScalerStats load(const std::string& path);
};

ScalerStats fit_scaler(const FeatureMatrix& train);
ScalerStats fit_scaler(const std::vector<FlowRecord>& train,
                       const std::vector<std::string>& names);

FeatureMatrix apply_scaler(const FeatureMatrix& rows, const ScalerStats& stats);
FeatureMatrix apply_scaler(const std::vector<FlowRecord>& records, const ScalerStats& stats);

// Inverse transform for one scaled vector, used when raw values are reported.
std::vector<double> unscale(const std::vector<double>& scaled, const ScalerStats& stats);

struct SplitSpec {
   double train_fraction = 0.70;
   std::string stratify_on = "Label"; // "Label" or "Attack"
   uint64_t seed = 0;
};

// Seeded stratified split. Per stratum, round(train_fraction * N) rows go to
// train; a singleton stratum goes to train with a warning on stderr. Row
// order within each part follows the input.
std::pair<std::vector<FlowRecord>, std::vector<FlowRecord>>
split_stratified(const std::vector<FlowRecord>& rows, const SplitSpec& spec);

} // namespace flowbench
