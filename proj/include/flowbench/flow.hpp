#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "flowbench/csv.hpp"

namespace flowbench {

// Canonical benign class name; the binary label is always consistent with it.
inline const std::string kBenignLabel = "Benign";

// One unified NetFlow record. Addresses are dotted-quad IPv4 strings; counters
// are totals over the flow's lifetime.
struct FlowRecord {
   std::string src_addr;
   uint16_t src_port = 0;
   std::string dst_addr;
   uint16_t dst_port = 0;
   uint8_t protocol = 0;       // IANA protocol number
   int64_t l7_proto = 0;       // application id, 0 = unknown
   int64_t in_bytes = 0;
   int64_t out_bytes = 0;
   int64_t in_pkts = 0;
   int64_t out_pkts = 0;
   uint16_t tcp_flags = 0;     // cumulative flag mask
   int64_t flow_duration_ms = 0;
   std::string flow_id;
   std::string dataset_source;
   bool attack = false;
   std::string label = kBenignLabel;

   // Throws std::invalid_argument when an invariant is violated:
   // non-negative counters, valid IPv4 endpoints, attack <=> label != Benign.
   void validate() const;
};

bool is_ipv4(const std::string& s);

// Attack-category taxonomy: an ordered member list plus a case-folded alias
// table mapping source-dataset labels onto members. Strings with no alias map
// to "Other".
struct AttackTaxonomy {
   std::vector<std::string> members;
   std::unordered_map<std::string, std::string> aliases; // case-folded key

   static AttackTaxonomy defaults();

   bool is_member(const std::string& name) const;
   std::string canonical(const std::string& original) const;

   void add_alias(const std::string& original, const std::string& member);
};

// IANA protocol number to canonical protocol name; unmapped numbers fall back
// to "OTHER".
struct ProtocolMap {
   std::map<int, std::string> names;

   static ProtocolMap defaults();

   // Valid inputs are 0..255; out-of-range throws.
   std::string canonical(int protocol_number) const;
};

// Unified CSV column names, in file order.
const std::vector<std::string>& unified_columns();

// Serialization of records to/from the unified CSV layout.
csv::Table flows_to_table(const std::vector<FlowRecord>& records);
std::vector<FlowRecord> flows_from_table(const csv::Table& table);

void write_flows_csv(const std::string& path, const std::vector<FlowRecord>& records);
std::vector<FlowRecord> read_flows_csv(const std::string& path);

} // namespace flowbench
