#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace flowbench::csv {

struct Table {
   std::vector<std::string> header;
   std::vector<std::vector<std::string>> rows;

   // Column index by exact header name; -1 when absent.
   int col(const std::string& name) const;
};

Table read_string(const std::string& text);
Table read_file(const std::string& path);

std::string to_string(const Table& table);
void write_file(const std::string& path, const Table& table);

// Streaming reader for chunked pipelines; yields up to max_rows per call and
// an empty batch at end of input.
class ChunkReader {
 public:
   explicit ChunkReader(const std::string& path);

   const std::vector<std::string>& header() const { return header_; }
   std::vector<std::vector<std::string>> next_chunk(size_t max_rows);
   bool done() const { return done_; }

 private:
   std::ifstream in_;
   std::vector<std::string> header_;
   bool done_ = false;
};

} // namespace flowbench::csv
