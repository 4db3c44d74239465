#include "flowbench/standardize.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "flowbench/util.hpp"

namespace flowbench {

using nlohmann::json;

UnifiedSchema UnifiedSchema::identity()
{
   UnifiedSchema s;
   for (const auto& c : unified_columns())
      s.column_map[c] = c;
   s.required = default_required();
   return s;
}

std::set<std::string> UnifiedSchema::default_required()
{
   return {"IPV4_SRC_ADDR", "L4_SRC_PORT", "IPV4_DST_ADDR", "L4_DST_PORT",
           "PROTOCOL",      "IN_BYTES",    "OUT_BYTES",     "IN_PKTS",
           "OUT_PKTS",      "FLOW_DURATION_MILLISECONDS"};
}

L7PortMap L7PortMap::defaults()
{
   // Well-known ports with their conventional application ids.
   L7PortMap m;
   auto add = [&](uint16_t port, uint8_t proto, int64_t id) {
      m.ids[{port, proto}] = id;
   };
   add(21, 6, 1);    // FTP control
   add(110, 6, 2);   // POP3
   add(25, 6, 3);    // SMTP
   add(143, 6, 4);   // IMAP
   add(53, 6, 5);    // DNS
   add(53, 17, 5);
   add(80, 6, 7);    // HTTP
   add(123, 17, 9);  // NTP
   add(161, 17, 14); // SNMP
   add(67, 17, 18);  // DHCP
   add(68, 17, 18);
   add(443, 6, 91);  // TLS
   add(22, 6, 92);   // SSH
   add(23, 6, 93);   // Telnet
   add(1883, 6, 222); // MQTT
   add(8883, 6, 222); // MQTT over TLS
   return m;
}

std::optional<int64_t> L7PortMap::lookup(uint16_t port, uint8_t protocol) const
{
   auto it = ids.find({port, protocol});
   if (it == ids.end())
      return std::nullopt;
   return it->second;
}

int64_t engineer_l7(uint16_t src_port, uint16_t dst_port, uint8_t protocol,
                    const L7PortMap& map)
{
   if (auto id = map.lookup(dst_port, protocol))
      return *id;
   if (auto id = map.lookup(src_port, protocol))
      return *id;
   return 0;
}

MappingConfig MappingConfig::from_json_text(const std::string& text)
{
   json j = json::parse(text);
   MappingConfig cfg;
   cfg.dataset_source = j.value("dataset_source", std::string());
   if (j.contains("column_map")) {
      cfg.schema.column_map.clear();
      for (auto& [raw, unified] : j["column_map"].items())
         cfg.schema.column_map[raw] = unified.get<std::string>();
   }
   if (j.contains("required")) {
      cfg.schema.required.clear();
      for (auto& r : j["required"])
         cfg.schema.required.insert(r.get<std::string>());
   }
   if (j.contains("members")) {
      cfg.taxonomy.members.clear();
      for (auto& m : j["members"])
         cfg.taxonomy.members.push_back(m.get<std::string>());
      cfg.taxonomy.aliases.clear();
      for (const auto& m : cfg.taxonomy.members)
         cfg.taxonomy.add_alias(m, m);
   }
   if (j.contains("aliases"))
      for (auto& [orig, member] : j["aliases"].items())
         cfg.taxonomy.add_alias(orig, member.get<std::string>());
   if (j.contains("l7_ports")) {
      cfg.l7.ids.clear();
      for (auto& e : j["l7_ports"])
         cfg.l7.ids[{e.at("port").get<uint16_t>(), e.at("protocol").get<uint8_t>()}] =
             e.at("id").get<int64_t>();
   }
   return cfg;
}

MappingConfig MappingConfig::from_json_file(const std::string& path)
{
   std::ifstream in(path);
   if (!in)
      throw std::runtime_error("cannot open mapping config: " + path);
   std::ostringstream ss;
   ss << in.rdbuf();
   return from_json_text(ss.str());
}

namespace {

int64_t parse_int_field(const std::string& raw, const char* what)
{
   std::string s = trim(raw);
   if (s.empty())
      throw std::invalid_argument(std::string("empty ") + what);
   // Some exports write integers as "123.0".
   int64_t v = 0;
   auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
   if (ec == std::errc() && p == s.data() + s.size())
      return v;
   double d = 0;
   auto [pd, ecd] = std::from_chars(s.data(), s.data() + s.size(), d);
   if (ecd == std::errc() && pd == s.data() + s.size() && std::floor(d) == d)
      return static_cast<int64_t>(d);
   throw std::invalid_argument(std::string("unparseable ") + what + ": " + raw);
}

} // namespace

StandardizeResult standardize_dataset(const csv::Table& rows, const UnifiedSchema& schema,
                                      const AttackTaxonomy& taxonomy,
                                      const std::string& dataset_source,
                                      const L7PortMap& l7)
{
   // unified field -> raw column index
   std::unordered_map<std::string, int> field_idx;
   for (const auto& [raw, unified] : schema.column_map) {
      int c = rows.col(raw);
      if (c >= 0)
         field_idx[unified] = c;
   }
   for (const auto& req : schema.required)
      if (!field_idx.count(req))
         throw std::runtime_error("missing required column for field: " + req);
   bool have_label = field_idx.count("Label") > 0;
   bool have_attack = field_idx.count("Attack") > 0;
   if (!have_label && !have_attack)
      throw std::runtime_error("missing required column for field: Label");

   auto get = [&](const std::vector<std::string>& row, const char* field) -> const std::string& {
      return row.at(field_idx.at(field));
   };
   auto has = [&](const char* field) { return field_idx.count(field) > 0; };

   StandardizeResult result;
   result.records.reserve(rows.rows.size());
   std::unordered_set<std::string> seen_ids;
   size_t rownum = 0;
   for (const auto& row : rows.rows) {
      ++rownum;
      try {
         FlowRecord r;
         r.src_addr = trim(get(row, "IPV4_SRC_ADDR"));
         r.dst_addr = trim(get(row, "IPV4_DST_ADDR"));
         if (!is_ipv4(r.src_addr) || !is_ipv4(r.dst_addr))
            throw std::invalid_argument("endpoint is not IPv4");
         int64_t sp = parse_int_field(get(row, "L4_SRC_PORT"), "source port");
         int64_t dp = parse_int_field(get(row, "L4_DST_PORT"), "destination port");
         if (sp < 0 || sp > 65535 || dp < 0 || dp > 65535)
            throw std::invalid_argument("port out of range");
         r.src_port = static_cast<uint16_t>(sp);
         r.dst_port = static_cast<uint16_t>(dp);
         int64_t proto = parse_int_field(get(row, "PROTOCOL"), "protocol");
         if (proto < 0 || proto > 255)
            throw std::invalid_argument("protocol out of range");
         r.protocol = static_cast<uint8_t>(proto);
         r.in_bytes = parse_int_field(get(row, "IN_BYTES"), "in_bytes");
         r.out_bytes = parse_int_field(get(row, "OUT_BYTES"), "out_bytes");
         r.in_pkts = parse_int_field(get(row, "IN_PKTS"), "in_pkts");
         r.out_pkts = parse_int_field(get(row, "OUT_PKTS"), "out_pkts");
         r.flow_duration_ms =
             parse_int_field(get(row, "FLOW_DURATION_MILLISECONDS"), "duration");
         r.tcp_flags = has("TCP_FLAGS")
                           ? static_cast<uint16_t>(parse_int_field(get(row, "TCP_FLAGS"),
                                                                   "tcp_flags"))
                           : 0;
         if (has("L7_PROTO"))
            r.l7_proto = parse_int_field(get(row, "L7_PROTO"), "application id");
         else
            r.l7_proto = engineer_l7(r.src_port, r.dst_port, r.protocol, l7);

         if (have_label) {
            r.label = taxonomy.canonical(get(row, "Label"));
            r.attack = r.label != kBenignLabel;
         } else {
            r.attack = parse_int_field(get(row, "Attack"), "binary label") != 0;
            r.label = r.attack ? "Other" : kBenignLabel;
         }

         r.dataset_source = has("dataset_source") && !get(row, "dataset_source").empty()
                                ? get(row, "dataset_source")
                                : dataset_source;
         r.flow_id = has("flow_id") && !get(row, "flow_id").empty()
                         ? get(row, "flow_id")
                         : dataset_source + "-" + std::to_string(rownum);
         if (!seen_ids.insert(r.flow_id).second)
            throw std::invalid_argument("duplicate flow_id " + r.flow_id);
         r.validate();
         result.records.push_back(std::move(r));
      } catch (const std::exception& e) {
         ++result.skipped;
         if (result.skip_samples.size() < 10)
            result.skip_samples.push_back("row " + std::to_string(rownum) + ": " + e.what());
      }
   }

   size_t total = rows.rows.size();
   if (total > 0 && static_cast<double>(result.skipped) / static_cast<double>(total) > 0.01) {
      std::string msg = "skip rate above 1% (" + std::to_string(result.skipped) + "/" +
                        std::to_string(total) + ")";
      for (const auto& s : result.skip_samples)
         msg += "\n  " + s;
      throw std::runtime_error(msg);
   }
   return result;
}

StandardizeResult standardize_dataset(const csv::Table& rows, const MappingConfig& cfg)
{
   return standardize_dataset(rows, cfg.schema, cfg.taxonomy, cfg.dataset_source, cfg.l7);
}

double feature_value(const FlowRecord& r, const std::string& name)
{
   if (name == "L4_SRC_PORT")
      return r.src_port;
   if (name == "L4_DST_PORT")
      return r.dst_port;
   if (name == "PROTOCOL")
      return r.protocol;
   if (name == "L7_PROTO")
      return static_cast<double>(r.l7_proto);
   if (name == "IN_BYTES")
      return static_cast<double>(r.in_bytes);
   if (name == "OUT_BYTES")
      return static_cast<double>(r.out_bytes);
   if (name == "IN_PKTS")
      return static_cast<double>(r.in_pkts);
   if (name == "OUT_PKTS")
      return static_cast<double>(r.out_pkts);
   if (name == "TCP_FLAGS")
      return r.tcp_flags;
   if (name == "FLOW_DURATION_MILLISECONDS")
      return static_cast<double>(r.flow_duration_ms);
   throw std::invalid_argument("not a numeric flow feature: " + name);
}

const std::vector<std::string>& default_feature_names()
{
   static const std::vector<std::string> names = {
       "IN_BYTES", "OUT_BYTES", "IN_PKTS", "OUT_PKTS",
       "FLOW_DURATION_MILLISECONDS", "PROTOCOL", "L7_PROTO", "TCP_FLAGS"};
   return names;
}

FeatureMatrix extract_features(const std::vector<FlowRecord>& records,
                               const std::vector<std::string>& names)
{
   FeatureMatrix m;
   m.names = names;
   m.rows.reserve(records.size());
   for (const auto& r : records) {
      std::vector<double> row;
      row.reserve(names.size());
      for (const auto& n : names)
         row.push_back(feature_value(r, n));
      m.rows.push_back(std::move(row));
   }
   return m;
}

ScalerStats fit_scaler(const FeatureMatrix& train)
{
   if (train.rows.empty())
      throw std::invalid_argument("cannot fit scaler on an empty training set");
   size_t d = train.names.size();
   ScalerStats stats;
   stats.feature_names = train.names;
   stats.mean.assign(d, 0.0);
   stats.stdev.assign(d, 0.0);
   double n = static_cast<double>(train.rows.size());
   for (const auto& row : train.rows)
      for (size_t j = 0; j < d; ++j)
         stats.mean[j] += row[j];
   for (size_t j = 0; j < d; ++j)
      stats.mean[j] /= n;
   for (const auto& row : train.rows)
      for (size_t j = 0; j < d; ++j) {
         double dlt = row[j] - stats.mean[j];
         stats.stdev[j] += dlt * dlt;
      }
   for (size_t j = 0; j < d; ++j) {
      stats.stdev[j] = std::sqrt(stats.stdev[j] / n);
      if (stats.stdev[j] == 0.0)
         stats.stdev[j] = 1.0; // constant feature scales to exactly zero
   }
   return stats;
}

ScalerStats fit_scaler(const std::vector<FlowRecord>& train,
                       const std::vector<std::string>& names)
{
   return fit_scaler(extract_features(train, names));
}

FeatureMatrix apply_scaler(const FeatureMatrix& rows, const ScalerStats& stats)
{
   if (rows.names != stats.feature_names)
      throw std::invalid_argument("feature names do not match scaler stats");
   FeatureMatrix out;
   out.names = rows.names;
   out.rows.reserve(rows.rows.size());
   for (const auto& row : rows.rows) {
      std::vector<double> scaled(row.size());
      for (size_t j = 0; j < row.size(); ++j)
         scaled[j] = (row[j] - stats.mean[j]) / stats.stdev[j];
      out.rows.push_back(std::move(scaled));
   }
   return out;
}

FeatureMatrix apply_scaler(const std::vector<FlowRecord>& records, const ScalerStats& stats)
{
   return apply_scaler(extract_features(records, stats.feature_names), stats);
}

std::vector<double> unscale(const std::vector<double>& scaled, const ScalerStats& stats)
{
   if (scaled.size() != stats.feature_names.size())
      throw std::invalid_argument("scaled vector width does not match scaler stats");
   std::vector<double> raw(scaled.size());
   for (size_t j = 0; j < scaled.size(); ++j)
      raw[j] = scaled[j] * stats.stdev[j] + stats.mean[j];
   return raw;
}

std::string ScalerStats::to_json() const
{
   json j;
   j["feature_names"] = feature_names;
   j["mean"] = mean;
   j["stdev"] = stdev;
   return j.dump(2);
}

ScalerStats ScalerStats::from_json(const std::string& text)
{
   json j = json::parse(text);
   ScalerStats s;
   s.feature_names = j.at("feature_names").get<std::vector<std::string>>();
   s.mean = j.at("mean").get<std::vector<double>>();
   s.stdev = j.at("stdev").get<std::vector<double>>();
   if (s.mean.size() != s.feature_names.size() || s.stdev.size() != s.feature_names.size())
      throw std::runtime_error("scaler stats fields have mismatched widths");
   return s;
}

void ScalerStats::save(const std::string& path) const
{
   std::ofstream out(path);
   if (!out)
      throw std::runtime_error("cannot write scaler stats: " + path);
   out << to_json() << "\n";
}

ScalerStats ScalerStats::load(const std::string& path)
{
   std::ifstream in(path);
   if (!in)
      throw std::runtime_error("cannot read scaler stats: " + path);
   std::ostringstream ss;
   ss << in.rdbuf();
   return from_json(ss.str());
}

std::pair<std::vector<FlowRecord>, std::vector<FlowRecord>>
split_stratified(const std::vector<FlowRecord>& rows, const SplitSpec& spec)
{
   if (spec.train_fraction <= 0.0 || spec.train_fraction >= 1.0)
      throw std::invalid_argument("train_fraction must lie in (0, 1)");
   bool by_attack = spec.stratify_on == "Attack";
   if (!by_attack && spec.stratify_on != "Label")
      throw std::invalid_argument("stratify_on must be Label or Attack");

   std::map<std::string, std::vector<size_t>> strata;
   for (size_t i = 0; i < rows.size(); ++i) {
      std::string key = by_attack ? (rows[i].attack ? "1" : "0") : rows[i].label;
      strata[key].push_back(i);
   }

   std::vector<char> in_train(rows.size(), 0);
   for (auto& [key, idx] : strata) {
      if (idx.size() == 1) {
         std::cerr << "warning: stratum '" << key
                   << "' has a single row; assigning it to train\n";
         in_train[idx[0]] = 1;
         continue;
      }
      Rng rng(derive_seed(spec.seed, "split:" + key));
      rng.shuffle(idx);
      size_t k = static_cast<size_t>(
          round_half_up(spec.train_fraction * static_cast<double>(idx.size())));
      for (size_t i = 0; i < k && i < idx.size(); ++i)
         in_train[idx[i]] = 1;
   }

   std::vector<FlowRecord> train, test;
   for (size_t i = 0; i < rows.size(); ++i)
      (in_train[i] ? train : test).push_back(rows[i]);
   return {std::move(train), std::move(test)};
}

} // namespace flowbench
