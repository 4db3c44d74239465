#include "flowbench/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "flowbench/standardize.hpp"

namespace flowbench {

const char* phase_kind_name(PhaseKind k)
{
   switch (k) {
   case PhaseKind::Benign:
      return "benign";
   case PhaseKind::SpoofDos:
      return "spoof_dos";
   case PhaseKind::PortScan:
      return "port_scan";
   case PhaseKind::CombinedDos:
      return "combined_dos";
   case PhaseKind::UdpDos:
      return "udp_dos";
   case PhaseKind::IcmpDos:
      return "icmp_dos";
   }
   return "?";
}

PhaseKind phase_kind_from_name(const std::string& name)
{
   for (PhaseKind k : {PhaseKind::Benign, PhaseKind::SpoofDos, PhaseKind::PortScan,
                       PhaseKind::CombinedDos, PhaseKind::UdpDos, PhaseKind::IcmpDos})
      if (name == phase_kind_name(k))
         return k;
   throw std::invalid_argument("unknown phase kind: " + name);
}

std::vector<SessionSpec> default_sessions(const std::string& late_flood_target,
                                          double rate_scale)
{
   TestbedHosts hosts;
   auto phase = [&](const char* name, PhaseKind kind, double start, double end,
                    double rate) {
      PhaseSpec p;
      p.name = name;
      p.kind = kind;
      p.start_s = start;
      p.end_s = end;
      p.rate = rate * rate_scale;
      return p;
   };

   SessionSpec s1;
   s1.name = "testbed-s1";
   s1.hosts = hosts;
   s1.phases.push_back(phase("S1-P0", PhaseKind::Benign, 0, 600, 1.0));
   {
      PhaseSpec p = phase("S1-P1", PhaseKind::SpoofDos, 600, 1800, 1.2);
      p.target_ip = "192.168.2.6";
      p.target_port = 22;
      p.source_port_base = 60002;
      s1.phases.push_back(p);
   }

   SessionSpec s2;
   s2.name = "testbed-s2";
   s2.hosts = hosts;
   s2.phases.push_back(phase("S2-P0", PhaseKind::Benign, 0, 300, 1.0));
   {
      PhaseSpec p = phase("S2-P1", PhaseKind::SpoofDos, 300, 600, 1.2);
      p.target_ip = "192.168.2.6";
      p.target_port = 22;
      p.source_port_base = 60002;
      s2.phases.push_back(p);
   }
   {
      PhaseSpec p = phase("S2-P2", PhaseKind::PortScan, 600, 900, 1.0);
      p.target_ip = "192.168.2.8";
      p.port_lo = 1;
      p.port_hi = 1024;
      p.source_port_base = 60003;
      s2.phases.push_back(p);
   }
   {
      PhaseSpec p = phase("S2-P3", PhaseKind::CombinedDos, 900, 1144, 1.2);
      p.target_ip = "192.168.2.15";
      p.port_lo = 1;
      p.port_hi = 65535;
      p.source_port_base = 60004;
      s2.phases.push_back(p);
   }

   SessionSpec s3;
   s3.name = "testbed-s3";
   s3.hosts = hosts;
   s3.phases.push_back(phase("S3-P0", PhaseKind::Benign, 0, 300, 1.0));
   {
      PhaseSpec p = phase("S3-P1", PhaseKind::UdpDos, 300, 600, 1.2);
      p.target_ip = late_flood_target;
      p.target_port = 0;
      p.source_port_base = 60005;
      s3.phases.push_back(p);
   }
   {
      PhaseSpec p = phase("S3-P2", PhaseKind::IcmpDos, 600, 875, 1.0);
      p.target_ip = late_flood_target;
      s3.phases.push_back(p);
   }

   return {s1, s2, s3};
}

namespace {

// Random public-looking address for spoofed senders; never a testbed address.
std::string spoofed_ip(Rng& rng)
{
   for (;;) {
      uint32_t a = static_cast<uint32_t>(rng.next_u64());
      uint8_t o1 = (a >> 24) & 0xFF;
      uint8_t o2 = (a >> 16) & 0xFF;
      if (o1 == 0 || o1 == 10 || o1 == 127 || o1 >= 224)
         continue;
      if (o1 == 192 && o2 == 168)
         continue;
      if (o1 == 172 && o2 >= 16 && o2 < 32)
         continue;
      return std::to_string(o1) + "." + std::to_string(o2) + "." +
             std::to_string((a >> 8) & 0xFF) + "." + std::to_string(a & 0xFF);
   }
}

uint16_t incremented_port(uint16_t base, size_t i)
{
   return static_cast<uint16_t>(base + i % (65536u - base));
}

double phase_timestamp(const PhaseSpec& p, size_t i, size_t count, Rng& rng)
{
   double step = p.duration() / static_cast<double>(count);
   return p.start_s + (static_cast<double>(i) + rng.uniform(0.0, 0.999)) * step;
}

void finish_flow(FlowRecord& r, const L7PortMap& l7)
{
   r.l7_proto = engineer_l7(r.src_port, r.dst_port, r.protocol, l7);
   r.label = kBenignLabel;
   r.attack = false;
}

void generate_benign(const SessionSpec& s, const PhaseSpec& p, int phase_idx,
                     size_t count, Rng& rng, const L7PortMap& l7,
                     std::vector<TimedFlow>& out)
{
   for (size_t i = 0; i < count; ++i) {
      FlowRecord r;
      r.src_addr = s.hosts.devices[rng.bounded(s.hosts.devices.size())];
      double kind = rng.next_double();
      if (kind < 0.70) {
         r.dst_addr = s.hosts.broker;
         r.dst_port = 8883;
         r.protocol = 6;
      } else if (kind < 0.85) {
         r.dst_addr = s.hosts.gateway;
         r.dst_port = 80;
         r.protocol = 6;
      } else if (kind < 0.95) {
         r.dst_addr = s.hosts.gateway;
         r.dst_port = 123;
         r.protocol = 17;
      } else {
         r.dst_addr = s.hosts.gateway;
         r.dst_port = 53;
         r.protocol = 17;
      }
      r.src_port = static_cast<uint16_t>(32768 + rng.bounded(27000));
      int64_t pkts = 1 + static_cast<int64_t>(std::floor(std::exp(rng.normal(2.0, 0.8))));
      pkts = std::min<int64_t>(pkts, 400);
      r.in_pkts = pkts;
      r.in_bytes = pkts * static_cast<int64_t>(rng.uniform(60.0, 400.0));
      r.out_pkts = std::max<int64_t>(1, pkts / 2 + static_cast<int64_t>(rng.bounded(4)));
      r.out_bytes = r.out_pkts * static_cast<int64_t>(rng.uniform(60.0, 600.0));
      double dur = std::exp(rng.normal(7.0, 1.2));
      r.flow_duration_ms = static_cast<int64_t>(std::min(dur, 120000.0));
      r.tcp_flags = r.protocol == 6 ? (rng.next_double() < 0.8 ? 27 : 26) : 0;
      finish_flow(r, l7);
      out.push_back({phase_timestamp(p, i, count, rng), phase_idx, std::move(r)});
   }
}

void generate_spoof_dos(const PhaseSpec& p, int phase_idx, size_t count, Rng& rng,
                        const L7PortMap& l7, std::vector<TimedFlow>& out)
{
   for (size_t i = 0; i < count; ++i) {
      FlowRecord r;
      r.src_addr = spoofed_ip(rng);
      r.src_port = incremented_port(p.source_port_base, i);
      r.dst_addr = p.target_ip;
      r.dst_port = p.target_port;
      r.protocol = 6;
      r.tcp_flags = 2; // bare SYN probes
      r.in_pkts = 1 + static_cast<int64_t>(rng.bounded(3));
      r.in_bytes = r.in_pkts * 40;
      r.out_pkts = static_cast<int64_t>(rng.bounded(2));
      r.out_bytes = r.out_pkts * 40;
      r.flow_duration_ms = static_cast<int64_t>(rng.uniform(0.0, 1000.0));
      finish_flow(r, l7);
      out.push_back({phase_timestamp(p, i, count, rng), phase_idx, std::move(r)});
   }
}

void generate_port_scan(const SessionSpec& s, const PhaseSpec& p, int phase_idx,
                        size_t count, Rng& rng, const L7PortMap& l7,
                        std::vector<TimedFlow>& out)
{
   size_t span = static_cast<size_t>(p.port_hi - p.port_lo) + 1;
   for (size_t i = 0; i < count; ++i) {
      FlowRecord r;
      r.src_addr = s.hosts.attacker; // scans carry the real source
      r.src_port = p.source_port_base;
      r.dst_addr = p.target_ip;
      r.dst_port = static_cast<uint16_t>(p.port_lo + i % span);
      r.protocol = 6;
      bool open = r.dst_port == 22 || r.dst_port == 80 || r.dst_port == 443;
      r.tcp_flags = open ? 18 : 22; // SYN+ACK seen vs SYN+RST
      r.in_pkts = 1;
      r.in_bytes = 44;
      r.out_pkts = 1;
      r.out_bytes = 40;
      r.flow_duration_ms = static_cast<int64_t>(rng.uniform(0.0, 100.0));
      finish_flow(r, l7);
      out.push_back({phase_timestamp(p, i, count, rng), phase_idx, std::move(r)});
   }
}

void generate_combined_dos(const PhaseSpec& p, int phase_idx, size_t count, Rng& rng,
                           const L7PortMap& l7, std::vector<TimedFlow>& out)
{
   size_t l4 = 0; // counts TCP/UDP flows for the incrementing ports
   for (size_t i = 0; i < count; ++i) {
      FlowRecord r;
      r.src_addr = spoofed_ip(rng);
      r.dst_addr = p.target_ip;
      switch (i % 3) {
      case 0:
         r.protocol = 6;
         r.tcp_flags = 2;
         break;
      case 1:
         r.protocol = 17;
         break;
      default:
         r.protocol = 1;
         break;
      }
      if (r.protocol == 1) {
         r.src_port = 0;
         r.dst_port = 0;
      } else {
         r.src_port = incremented_port(p.source_port_base, l4);
         r.dst_port = static_cast<uint16_t>(p.port_lo + l4 % (p.port_hi - p.port_lo + 1u));
         ++l4;
      }
      r.in_pkts = 1 + static_cast<int64_t>(rng.bounded(5));
      r.in_bytes = r.in_pkts * (r.protocol == 17 ? 128 : r.protocol == 1 ? 64 : 40);
      r.out_pkts = 0;
      r.out_bytes = 0;
      r.flow_duration_ms = static_cast<int64_t>(rng.uniform(0.0, 500.0));
      finish_flow(r, l7);
      out.push_back({phase_timestamp(p, i, count, rng), phase_idx, std::move(r)});
   }
}

void generate_udp_dos(const PhaseSpec& p, int phase_idx, size_t count, Rng& rng,
                      const L7PortMap& l7, std::vector<TimedFlow>& out)
{
   for (size_t i = 0; i < count; ++i) {
      FlowRecord r;
      r.src_addr = spoofed_ip(rng);
      r.src_port = incremented_port(p.source_port_base, i);
      r.dst_addr = p.target_ip;
      r.dst_port = p.target_port;
      r.protocol = 17;
      r.in_pkts = 1 + static_cast<int64_t>(rng.bounded(4));
      r.in_bytes = r.in_pkts * 128;
      r.out_pkts = 0;
      r.out_bytes = 0;
      r.flow_duration_ms = static_cast<int64_t>(rng.uniform(0.0, 500.0));
      finish_flow(r, l7);
      out.push_back({phase_timestamp(p, i, count, rng), phase_idx, std::move(r)});
   }
}

void generate_icmp_dos(const PhaseSpec& p, int phase_idx, size_t count, Rng& rng,
                       const L7PortMap& l7, std::vector<TimedFlow>& out)
{
   for (size_t i = 0; i < count; ++i) {
      FlowRecord r;
      r.src_addr = spoofed_ip(rng);
      r.dst_addr = p.target_ip;
      r.protocol = 1;
      r.in_pkts = 1 + static_cast<int64_t>(rng.bounded(10));
      r.in_bytes = r.in_pkts * 64;
      r.out_pkts = r.in_pkts; // echo replies
      r.out_bytes = r.out_pkts * 64;
      r.flow_duration_ms = static_cast<int64_t>(rng.uniform(0.0, 500.0));
      finish_flow(r, l7);
      out.push_back({phase_timestamp(p, i, count, rng), phase_idx, std::move(r)});
   }
}

} // namespace

std::vector<TimedFlow> generate_session(const SessionSpec& session, uint64_t seed)
{
   for (size_t i = 1; i < session.phases.size(); ++i)
      if (session.phases[i].start_s < session.phases[i - 1].end_s)
         throw std::invalid_argument("session phases overlap");
   L7PortMap l7 = L7PortMap::defaults();
   std::vector<TimedFlow> out;
   for (size_t pi = 0; pi < session.phases.size(); ++pi) {
      const PhaseSpec& p = session.phases[pi];
      if (p.duration() <= 0.0)
         throw std::invalid_argument("phase has non-positive duration: " + p.name);
      size_t count = static_cast<size_t>(std::llround(p.rate * p.duration()));
      if (count == 0)
         continue;
      Rng rng(derive_seed(seed, session.name + ":" + p.name));
      int idx = static_cast<int>(pi);
      switch (p.kind) {
      case PhaseKind::Benign:
         generate_benign(session, p, idx, count, rng, l7, out);
         break;
      case PhaseKind::SpoofDos:
         generate_spoof_dos(p, idx, count, rng, l7, out);
         break;
      case PhaseKind::PortScan:
         generate_port_scan(session, p, idx, count, rng, l7, out);
         break;
      case PhaseKind::CombinedDos:
         generate_combined_dos(p, idx, count, rng, l7, out);
         break;
      case PhaseKind::UdpDos:
         generate_udp_dos(p, idx, count, rng, l7, out);
         break;
      case PhaseKind::IcmpDos:
         generate_icmp_dos(p, idx, count, rng, l7, out);
         break;
      }
   }
   std::sort(out.begin(), out.end(),
             [](const TimedFlow& a, const TimedFlow& b) { return a.ts < b.ts; });
   for (size_t i = 0; i < out.size(); ++i) {
      out[i].rec.flow_id = session.name + "-" + std::to_string(i);
      out[i].rec.dataset_source = session.name;
   }
   return out;
}

bool GroundTruthRule::matches(const TimedFlow& f) const
{
   if (f.ts < window_start || f.ts >= window_end)
      return false;
   if (src_ip && f.rec.src_addr != *src_ip)
      return false;
   if (dst_ip && f.rec.dst_addr != *dst_ip)
      return false;
   if (protocol && f.rec.protocol != *protocol)
      return false;
   if (dst_port && f.rec.dst_port != *dst_port)
      return false;
   if (src_port_eq && f.rec.src_port != *src_port_eq)
      return false;
   if (src_port_min && f.rec.src_port < *src_port_min)
      return false;
   return true;
}

std::vector<GroundTruthRule> rules_for(const SessionSpec& session)
{
   std::vector<GroundTruthRule> rules;
   for (const PhaseSpec& p : session.phases) {
      GroundTruthRule base;
      base.window_start = p.start_s;
      base.window_end = p.end_s;
      base.dst_ip = p.target_ip;
      switch (p.kind) {
      case PhaseKind::Benign:
         break;
      case PhaseKind::SpoofDos: {
         GroundTruthRule r = base;
         r.label = "DoS";
         r.protocol = 6;
         r.dst_port = p.target_port;
         r.src_port_min = p.source_port_base;
         rules.push_back(r);
         break;
      }
      case PhaseKind::PortScan: {
         GroundTruthRule r = base;
         r.label = "Reconnaissance";
         r.src_ip = session.hosts.attacker;
         r.src_port_eq = p.source_port_base;
         rules.push_back(r);
         break;
      }
      case PhaseKind::CombinedDos: {
         GroundTruthRule tcp = base;
         tcp.label = "DoS";
         tcp.protocol = 6;
         tcp.src_port_min = p.source_port_base;
         rules.push_back(tcp);
         GroundTruthRule udp = base;
         udp.label = "DoS";
         udp.protocol = 17;
         udp.src_port_min = p.source_port_base;
         rules.push_back(udp);
         GroundTruthRule icmp = base;
         icmp.label = "DoS";
         icmp.protocol = 1;
         rules.push_back(icmp);
         break;
      }
      case PhaseKind::UdpDos: {
         GroundTruthRule r = base;
         r.label = "DoS";
         r.protocol = 17;
         r.src_port_min = p.source_port_base;
         rules.push_back(r);
         break;
      }
      case PhaseKind::IcmpDos: {
         GroundTruthRule r = base;
         r.label = "DoS";
         r.protocol = 1;
         rules.push_back(r);
         break;
      }
      }
   }
   return rules;
}

void label_flows(std::vector<TimedFlow>& flows, const std::vector<GroundTruthRule>& rules)
{
   for (auto& f : flows) {
      f.rec.label = kBenignLabel;
      f.rec.attack = false;
      for (const auto& r : rules) {
         if (r.matches(f)) {
            f.rec.label = r.label;
            f.rec.attack = true;
            break;
         }
      }
   }
}

std::vector<FlowRecord> to_records(const std::vector<TimedFlow>& flows)
{
   std::vector<FlowRecord> out;
   out.reserve(flows.size());
   for (const auto& f : flows)
      out.push_back(f.rec);
   return out;
}

std::vector<FlowRecord> synthesize_session(const SessionSpec& session, uint64_t seed)
{
   std::vector<TimedFlow> flows = generate_session(session, seed);
   label_flows(flows, rules_for(session));
   for (const auto& f : flows)
      f.rec.validate();
   return to_records(flows);
}

} // namespace flowbench
