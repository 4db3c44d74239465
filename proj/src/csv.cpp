#include "flowbench/csv.hpp"

#include <sstream>
#include <stdexcept>

namespace flowbench::csv {

namespace {

// Parses one record starting at pos; handles quoted fields with embedded
// separators, escaped quotes, and CRLF line endings.
bool parse_record(const std::string& text, size_t& pos, std::vector<std::string>& out)
{
   out.clear();
   if (pos >= text.size())
      return false;
   std::string field;
   bool in_quotes = false;
   bool saw_any = false;
   while (pos < text.size()) {
      char c = text[pos];
      if (in_quotes) {
         if (c == '"') {
            if (pos + 1 < text.size() && text[pos + 1] == '"') {
               field.push_back('"');
               pos += 2;
            } else {
               in_quotes = false;
               ++pos;
            }
         } else {
            field.push_back(c);
            ++pos;
         }
         continue;
      }
      if (c == '"' && field.empty()) {
         in_quotes = true;
         saw_any = true;
         ++pos;
      } else if (c == ',') {
         out.push_back(std::move(field));
         field.clear();
         saw_any = true;
         ++pos;
      } else if (c == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') {
         pos += 2;
         out.push_back(std::move(field));
         return true;
      } else if (c == '\n') {
         ++pos;
         out.push_back(std::move(field));
         return true;
      } else {
         field.push_back(c);
         saw_any = true;
         ++pos;
      }
   }
   if (saw_any || !field.empty())
      out.push_back(std::move(field));
   return saw_any || !out.empty();
}

bool needs_quoting(const std::string& s)
{
   return s.find_first_of(",\"\n\r") != std::string::npos;
}

void append_field(std::string& out, const std::string& s)
{
   if (!needs_quoting(s)) {
      out += s;
      return;
   }
   out.push_back('"');
   for (char c : s) {
      if (c == '"')
         out.push_back('"');
      out.push_back(c);
   }
   out.push_back('"');
}

std::vector<std::string> split_line(const std::string& line)
{
   std::string text = line;
   text.push_back('\n');
   size_t pos = 0;
   std::vector<std::string> fields;
   parse_record(text, pos, fields);
   return fields;
}

// Reads one logical record from a stream, joining physical lines while a
// quoted field stays open.
bool read_record(std::istream& in, std::vector<std::string>& out)
{
   std::string line;
   if (!std::getline(in, line))
      return false;
   // Re-join while quotes are unbalanced.
   auto balanced = [](const std::string& s) {
      size_t q = 0;
      for (char c : s)
         if (c == '"')
            ++q;
      return q % 2 == 0;
   };
   while (!balanced(line)) {
      std::string more;
      if (!std::getline(in, more))
         break;
      line += "\n" + more;
   }
   if (!line.empty() && line.back() == '\r')
      line.pop_back();
   out = split_line(line);
   return true;
}

} // namespace

int Table::col(const std::string& name) const
{
   for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name)
         return static_cast<int>(i);
   return -1;
}

Table read_string(const std::string& text)
{
   Table t;
   size_t pos = 0;
   std::vector<std::string> fields;
   if (!parse_record(text, pos, fields))
      return t;
   t.header = fields;
   while (parse_record(text, pos, fields)) {
      if (fields.size() == 1 && fields[0].empty())
         continue;
      t.rows.push_back(fields);
   }
   return t;
}

Table read_file(const std::string& path)
{
   std::ifstream in(path, std::ios::binary);
   if (!in)
      throw std::runtime_error("cannot open CSV file: " + path);
   std::ostringstream ss;
   ss << in.rdbuf();
   return read_string(ss.str());
}

std::string to_string(const Table& table)
{
   std::string out;
   for (size_t i = 0; i < table.header.size(); ++i) {
      if (i)
         out.push_back(',');
      append_field(out, table.header[i]);
   }
   out.push_back('\n');
   for (const auto& row : table.rows) {
      for (size_t i = 0; i < row.size(); ++i) {
         if (i)
            out.push_back(',');
         append_field(out, row[i]);
      }
      out.push_back('\n');
   }
   return out;
}

void write_file(const std::string& path, const Table& table)
{
   std::ofstream out(path, std::ios::binary);
   if (!out)
      throw std::runtime_error("cannot write CSV file: " + path);
   out << to_string(table);
}

ChunkReader::ChunkReader(const std::string& path) : in_(path, std::ios::binary)
{
   if (!in_)
      throw std::runtime_error("cannot open CSV file: " + path);
   std::vector<std::string> fields;
   if (read_record(in_, fields))
      header_ = fields;
   else
      done_ = true;
}

std::vector<std::vector<std::string>> ChunkReader::next_chunk(size_t max_rows)
{
   std::vector<std::vector<std::string>> rows;
   std::vector<std::string> fields;
   while (rows.size() < max_rows && read_record(in_, fields)) {
      if (fields.size() == 1 && fields[0].empty())
         continue;
      rows.push_back(fields);
   }
   if (rows.size() < max_rows)
      done_ = true;
   return rows;
}

} // namespace flowbench::csv
