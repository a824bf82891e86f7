#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace geocorpus {

// RFC-style quoting: fields containing comma, quote, CR or LF are wrapped in
// double quotes with embedded quotes doubled. Everything else is written verbatim.
inline std::string csv_escape(std::string_view field) {
  const bool needs_quotes = field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline void csv_write_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i != 0) os.put(',');
    os << csv_escape(fields[i]);
  }
  os.put('\n');
}

// Streaming reader for the same dialect. Quoted fields may span lines;
// literal line breaks inside quotes are preserved in the parsed field.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  // Reads one logical row. Returns false on end of input.
  bool read_row(std::vector<std::string>& fields) {
    fields.clear();
    int c = in_.get();
    if (c == std::istream::traits_type::eof()) return false;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    while (true) {
      if (c == std::istream::traits_type::eof()) {
        fields.push_back(std::move(field));
        return true;
      }
      const char ch = static_cast<char>(c);
      if (in_quotes) {
        if (ch == '"') {
          const int next = in_.peek();
          if (next == '"') {
            in_.get();
            field.push_back('"');
          } else {
            in_quotes = false;
          }
        } else {
          field.push_back(ch);
        }
      } else if (ch == '"' && field.empty() && !any) {
        in_quotes = true;
      } else if (ch == ',') {
        fields.push_back(std::move(field));
        field.clear();
        any = false;
        c = in_.get();
        continue;
      } else if (ch == '\r') {
        // swallow; \r\n and bare \r both end the row below via \n or eof
        const int next = in_.peek();
        if (next == '\n') in_.get();
        fields.push_back(std::move(field));
        return true;
      } else if (ch == '\n') {
        fields.push_back(std::move(field));
        return true;
      } else {
        field.push_back(ch);
        any = true;
      }
      c = in_.get();
    }
  }

 private:
  std::istream& in_;
};

}  // namespace geocorpus
