#pragma once

#include <zlib.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "geocorpus/errors.hpp"

namespace geocorpus {

// Gzip writer with a pinned header (mtime 0, OS byte 255, fixed level) so that
// identical input bytes always produce identical output files.
class GzipWriter {
 public:
  explicit GzipWriter(const std::filesystem::path& path)
      : out_(path, std::ios::binary), path_(path.string()) {
    if (!out_) throw IoError("cannot open for writing: " + path_);
    std::memset(&strm_, 0, sizeof(strm_));
    if (deflateInit2(&strm_, 6, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
      throw IoError("deflateInit2 failed for " + path_);
    }
    std::memset(&header_, 0, sizeof(header_));
    header_.os = 255;
    deflateSetHeader(&strm_, &header_);
    open_ = true;
  }

  GzipWriter(const GzipWriter&) = delete;
  GzipWriter& operator=(const GzipWriter&) = delete;

  ~GzipWriter() {
    if (open_) {
      try {
        close();
      } catch (...) {
      }
    }
  }

  void write(std::string_view data) {
    strm_.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    strm_.avail_in = static_cast<uInt>(data.size());
    pump(Z_NO_FLUSH);
  }

  void close() {
    if (!open_) return;
    strm_.next_in = nullptr;
    strm_.avail_in = 0;
    pump(Z_FINISH);
    deflateEnd(&strm_);
    open_ = false;
    out_.flush();
    if (!out_) throw IoError("write failed: " + path_);
    out_.close();
  }

 private:
  void pump(int flush) {
    char buf[1 << 15];
    do {
      strm_.next_out = reinterpret_cast<Bytef*>(buf);
      strm_.avail_out = sizeof(buf);
      const int rc = deflate(&strm_, flush);
      if (rc == Z_STREAM_ERROR) throw IoError("deflate failed: " + path_);
      out_.write(buf, static_cast<std::streamsize>(sizeof(buf) - strm_.avail_out));
      if (rc == Z_STREAM_END) break;
    } while (strm_.avail_out == 0 || strm_.avail_in > 0);
  }

  std::ofstream out_;
  std::string path_;
  z_stream strm_{};
  gz_header header_{};
  bool open_ = false;
};

// Reads an entire .gz (or plain deflate-wrapped) file into memory.
inline std::string gzip_read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::string compressed((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  z_stream strm;
  std::memset(&strm, 0, sizeof(strm));
  if (inflateInit2(&strm, 15 + 32) != Z_OK) throw IoError("inflateInit2 failed");
  strm.next_in = reinterpret_cast<Bytef*>(compressed.data());
  strm.avail_in = static_cast<uInt>(compressed.size());
  std::string out;
  char buf[1 << 15];
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    strm.next_out = reinterpret_cast<Bytef*>(buf);
    strm.avail_out = sizeof(buf);
    rc = inflate(&strm, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&strm);
      throw IoError("corrupt gzip stream: " + path.string());
    }
    out.append(buf, sizeof(buf) - strm.avail_out);
  }
  inflateEnd(&strm);
  return out;
}

}  // namespace geocorpus
