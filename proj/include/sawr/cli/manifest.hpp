#pragma once

#include <fstream>
#include <map>
#include <set>
#include <string>

#include "json.hpp"

namespace sawr::cli {

/// Append-only JSON-lines record of one command run. Each line is an
/// object with an "event" field:
///   run       command name and full configuration snapshot
///   input     path and FNV-1a 64 content hash of a file that was read
///   epoch     per-epoch trace (loss, dev score, seconds, ...)
///   artifact  path and content hash of a file that was written
///   end       exit status
class RunManifest {
 public:
  explicit RunManifest(const std::string& path);

  const std::string& path() const { return path_; }

  void run(const std::string& command, const std::map<std::string, std::string>& config);
  void input(const std::string& file);
  void epoch(nlohmann::json fields);
  /// Hashes `file` now. A path already recorded is not recorded again.
  void artifact(const std::string& file);
  void end(int status, const std::string& message = "");

 private:
  void write(nlohmann::json record);

  std::string path_;
  std::ofstream out_;
  std::set<std::string> artifacts_;
};

}  // namespace sawr::cli
