#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flowbench/flow.hpp"
#include "flowbench/util.hpp"

namespace flowbench {

enum class PhaseKind { Benign, SpoofDos, PortScan, CombinedDos, UdpDos, IcmpDos };

const char* phase_kind_name(PhaseKind k);
PhaseKind phase_kind_from_name(const std::string& name);

// Testbed device addresses used by the default sessions.
struct TestbedHosts {
   std::string gateway = "192.168.2.1";
   std::string broker = "192.168.2.2";
   std::string attacker = "192.168.2.4";
   std::vector<std::string> devices = {"192.168.2.3", "192.168.2.6", "192.168.2.8",
                                       "192.168.2.15"};
};

struct PhaseSpec {
   std::string name;
   PhaseKind kind = PhaseKind::Benign;
   double start_s = 0.0;
   double end_s = 0.0;
   double rate = 1.0;            // flows per second
   std::string target_ip;        // attack phases only
   uint16_t target_port = 0;     // fixed destination port (spoof)
   uint16_t port_lo = 1;         // scanned / incremented destination range
   uint16_t port_hi = 1024;
   uint16_t source_port_base = 0;

   double duration() const { return end_s - start_s; }
};

struct SessionSpec {
   std::string name;       // becomes dataset_source
   TestbedHosts hosts;
   std::vector<PhaseSpec> phases; // non-overlapping, ordered by start
};

// Three capture sessions mirroring the default experiment chronology. The
// UDP/ICMP flood target is configurable; rates scale uniformly.
std::vector<SessionSpec> default_sessions(const std::string& late_flood_target = "192.168.2.8",
                                          double rate_scale = 1.0);

struct TimedFlow {
   double ts = 0.0; // seconds from session start
   int phase = 0;
   FlowRecord rec;
};

// Deterministic flow-level generation; every flow starts labeled Benign and
// ground-truth labeling is applied separately.
std::vector<TimedFlow> generate_session(const SessionSpec& session, uint64_t seed);

// One labeling predicate; a flow matching every present field in the window
// receives the rule's category.
struct GroundTruthRule {
   std::string label;
   double window_start = 0.0;
   double window_end = 0.0;
   std::optional<std::string> src_ip;
   std::optional<std::string> dst_ip;
   std::optional<uint8_t> protocol;
   std::optional<uint16_t> dst_port;
   std::optional<uint16_t> src_port_eq;
   std::optional<uint16_t> src_port_min;

   bool matches(const TimedFlow& f) const;
};

// Derives labeling rules from the attack phases (window, target, protocol,
// and source-port pattern).
std::vector<GroundTruthRule> rules_for(const SessionSpec& session);

// Applies the first matching rule per flow; non-matching flows stay Benign.
void label_flows(std::vector<TimedFlow>& flows, const std::vector<GroundTruthRule>& rules);

std::vector<FlowRecord> to_records(const std::vector<TimedFlow>& flows);

// Generation, labeling, and flattening for a whole session.
std::vector<FlowRecord> synthesize_session(const SessionSpec& session, uint64_t seed);

} // namespace flowbench
