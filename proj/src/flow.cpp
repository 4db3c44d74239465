#include "flowbench/flow.hpp"

#include <charconv>
#include <stdexcept>

#include "flowbench/util.hpp"

namespace flowbench {

bool is_ipv4(const std::string& s)
{
   int octets = 0;
   size_t i = 0;
   while (i < s.size()) {
      if (!std::isdigit(static_cast<unsigned char>(s[i])))
         return false;
      size_t start = i;
      int value = 0;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
         value = value * 10 + (s[i] - '0');
         if (value > 255 || i - start >= 3)
            return false;
         ++i;
      }
      if (i - start > 1 && s[start] == '0')
         return false; // no leading zeros
      ++octets;
      if (i < s.size()) {
         if (s[i] != '.')
            return false;
         ++i;
         if (i == s.size())
            return false;
      }
   }
   return octets == 4;
}

void FlowRecord::validate() const
{
   if (!is_ipv4(src_addr))
      throw std::invalid_argument("invalid IPv4 source address: " + src_addr);
   if (!is_ipv4(dst_addr))
      throw std::invalid_argument("invalid IPv4 destination address: " + dst_addr);
   if (in_bytes < 0 || out_bytes < 0 || in_pkts < 0 || out_pkts < 0)
      throw std::invalid_argument("negative traffic counter in flow " + flow_id);
   if (flow_duration_ms < 0)
      throw std::invalid_argument("negative duration in flow " + flow_id);
   if (l7_proto < 0)
      throw std::invalid_argument("negative application id in flow " + flow_id);
   if (flow_id.empty())
      throw std::invalid_argument("empty flow_id");
   if (label.empty())
      throw std::invalid_argument("empty label in flow " + flow_id);
   if (attack == (label == kBenignLabel))
      throw std::invalid_argument("binary label disagrees with category in flow " + flow_id);
}

AttackTaxonomy AttackTaxonomy::defaults()
{
   AttackTaxonomy t;
   t.members = {kBenignLabel, "DoS",          "DDoS",     "Reconnaissance",
                "BruteForce", "Injection",    "Infiltration", "Backdoor",
                "Exploits",   "Fuzzers",      "Theft",    "Other"};
   for (const auto& m : t.members)
      t.add_alias(m, m);

   // Common source-dataset spellings.
   t.add_alias("normal", kBenignLabel);
   t.add_alias("background", kBenignLabel);
   t.add_alias("ddos", "DDoS");
   t.add_alias("dos", "DoS");
   t.add_alias("dos attacks-goldeneye", "DoS");
   t.add_alias("dos attacks-slowloris", "DoS");
   t.add_alias("dos attacks-hulk", "DoS");
   t.add_alias("dos attacks-slowhttptest", "DoS");
   t.add_alias("ddos attack-hoic", "DDoS");
   t.add_alias("ddos attack-loic-udp", "DDoS");
   t.add_alias("ddos attacks-loic-http", "DDoS");
   t.add_alias("scanning", "Reconnaissance");
   t.add_alias("reconnaissance", "Reconnaissance");
   t.add_alias("port scan", "Reconnaissance");
   t.add_alias("portscan", "Reconnaissance");
   t.add_alias("analysis", "Reconnaissance");
   t.add_alias("brute force", "BruteForce");
   t.add_alias("brute-force", "BruteForce");
   t.add_alias("bruteforce", "BruteForce");
   t.add_alias("brute force -web", "BruteForce");
   t.add_alias("brute force -xss", "Injection");
   t.add_alias("ssh-bruteforce", "BruteForce");
   t.add_alias("ftp-bruteforce", "BruteForce");
   t.add_alias("password", "BruteForce");
   t.add_alias("sql injection", "Injection");
   t.add_alias("xss", "Injection");
   t.add_alias("injection", "Injection");
   t.add_alias("infilteration", "Infiltration");
   t.add_alias("infiltration", "Infiltration");
   t.add_alias("backdoor", "Backdoor");
   t.add_alias("backdoors", "Backdoor");
   t.add_alias("bot", "Backdoor");
   t.add_alias("exploits", "Exploits");
   t.add_alias("shellcode", "Exploits");
   t.add_alias("worms", "Exploits");
   t.add_alias("fuzzers", "Fuzzers");
   t.add_alias("theft", "Theft");
   t.add_alias("theft-keylogging", "Theft");
   t.add_alias("data_exfiltration", "Theft");
   t.add_alias("keylogging", "Theft");
   return t;
}

bool AttackTaxonomy::is_member(const std::string& name) const
{
   for (const auto& m : members)
      if (m == name)
         return true;
   return false;
}

void AttackTaxonomy::add_alias(const std::string& original, const std::string& member)
{
   if (!is_member(member))
      throw std::invalid_argument("alias target is not a taxonomy member: " + member);
   aliases[to_lower(trim(original))] = member;
}

std::string AttackTaxonomy::canonical(const std::string& original) const
{
   auto it = aliases.find(to_lower(trim(original)));
   if (it != aliases.end())
      return it->second;
   return "Other";
}

ProtocolMap ProtocolMap::defaults()
{
   ProtocolMap m;
   m.names = {{1, "ICMP"}, {2, "IGMP"}, {6, "TCP"},   {17, "UDP"},
              {47, "GRE"}, {50, "ESP"}, {51, "AH"},   {89, "OSPF"},
              {132, "SCTP"}};
   return m;
}

std::string ProtocolMap::canonical(int protocol_number) const
{
   if (protocol_number < 0 || protocol_number > 255)
      throw std::out_of_range("protocol number out of range: " +
                              std::to_string(protocol_number));
   auto it = names.find(protocol_number);
   return it == names.end() ? "OTHER" : it->second;
}

const std::vector<std::string>& unified_columns()
{
   static const std::vector<std::string> cols = {
       "IPV4_SRC_ADDR", "L4_SRC_PORT", "IPV4_DST_ADDR", "L4_DST_PORT",
       "PROTOCOL",      "L7_PROTO",    "IN_BYTES",      "OUT_BYTES",
       "IN_PKTS",       "OUT_PKTS",    "TCP_FLAGS",     "FLOW_DURATION_MILLISECONDS",
       "flow_id",       "dataset_source", "Attack",     "Label"};
   return cols;
}

csv::Table flows_to_table(const std::vector<FlowRecord>& records)
{
   csv::Table t;
   t.header = unified_columns();
   t.rows.reserve(records.size());
   for (const auto& r : records) {
      t.rows.push_back({r.src_addr, std::to_string(r.src_port), r.dst_addr,
                        std::to_string(r.dst_port), std::to_string(r.protocol),
                        std::to_string(r.l7_proto), std::to_string(r.in_bytes),
                        std::to_string(r.out_bytes), std::to_string(r.in_pkts),
                        std::to_string(r.out_pkts), std::to_string(r.tcp_flags),
                        std::to_string(r.flow_duration_ms), r.flow_id,
                        r.dataset_source, r.attack ? "1" : "0", r.label});
   }
   return t;
}

namespace {

int64_t parse_i64(const std::string& s, const char* what)
{
   int64_t v = 0;
   std::string x = trim(s);
   auto [p, ec] = std::from_chars(x.data(), x.data() + x.size(), v);
   if (ec != std::errc() || p != x.data() + x.size())
      throw std::invalid_argument(std::string("unparseable ") + what + ": " + s);
   return v;
}

} // namespace

std::vector<FlowRecord> flows_from_table(const csv::Table& table)
{
   const auto& cols = unified_columns();
   std::vector<int> idx(cols.size());
   for (size_t i = 0; i < cols.size(); ++i) {
      idx[i] = table.col(cols[i]);
      if (idx[i] < 0)
         throw std::runtime_error("missing unified column: " + cols[i]);
   }
   std::vector<FlowRecord> out;
   out.reserve(table.rows.size());
   for (const auto& row : table.rows) {
      FlowRecord r;
      auto f = [&](size_t i) -> const std::string& { return row.at(idx[i]); };
      r.src_addr = f(0);
      r.src_port = static_cast<uint16_t>(parse_i64(f(1), "source port"));
      r.dst_addr = f(2);
      r.dst_port = static_cast<uint16_t>(parse_i64(f(3), "destination port"));
      r.protocol = static_cast<uint8_t>(parse_i64(f(4), "protocol"));
      r.l7_proto = parse_i64(f(5), "application id");
      r.in_bytes = parse_i64(f(6), "in_bytes");
      r.out_bytes = parse_i64(f(7), "out_bytes");
      r.in_pkts = parse_i64(f(8), "in_pkts");
      r.out_pkts = parse_i64(f(9), "out_pkts");
      r.tcp_flags = static_cast<uint16_t>(parse_i64(f(10), "tcp_flags"));
      r.flow_duration_ms = parse_i64(f(11), "duration");
      r.flow_id = f(12);
      r.dataset_source = f(13);
      r.attack = parse_i64(f(14), "binary label") != 0;
      r.label = f(15);
      out.push_back(std::move(r));
   }
   return out;
}

void write_flows_csv(const std::string& path, const std::vector<FlowRecord>& records)
{
   csv::write_file(path, flows_to_table(records));
}

std::vector<FlowRecord> read_flows_csv(const std::string& path)
{
   return flows_from_table(csv::read_file(path));
}

} // namespace flowbench
