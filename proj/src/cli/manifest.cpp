#include "sawr/cli/manifest.hpp"

#include "sawr/errors.hpp"
#include "sawr/hash.hpp"

namespace sawr::cli {

RunManifest::RunManifest(const std::string& path) : path_(path), out_(path, std::ios::app) {
  if (!out_) throw PathError("cannot open manifest " + path);
}

void RunManifest::write(nlohmann::json record) {
  out_ << record.dump() << '\n';
  out_.flush();
}

void RunManifest::run(const std::string& command, const std::map<std::string, std::string>& config) {
  write({{"event", "run"}, {"command", command}, {"config", config}});
}

void RunManifest::input(const std::string& file) {
  write({{"event", "input"}, {"path", file}, {"fnv1a64", hex64(file_hash(file))}});
}

void RunManifest::epoch(nlohmann::json fields) {
  fields["event"] = "epoch";
  write(std::move(fields));
}

void RunManifest::artifact(const std::string& file) {
  if (!artifacts_.insert(file).second) return;
  write({{"event", "artifact"}, {"path", file}, {"fnv1a64", hex64(file_hash(file))}});
}

void RunManifest::end(int status, const std::string& message) {
  nlohmann::json r{{"event", "end"}, {"status", status}};
  if (!message.empty()) r["message"] = message;
  write(std::move(r));
}

}  // namespace sawr::cli
