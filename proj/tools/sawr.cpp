// Command-line front end: sawr <command> [--config FILE] [--key value ...]

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "sawr/cli/commands.hpp"
#include "sawr/cli/config.hpp"
#include "sawr/errors.hpp"

namespace {

std::string command_help() {
  std::ostringstream os;
  os << "one of:";
  for (const auto& c : sawr::cli::command_names()) os << ' ' << c;
  os << " show-config";
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace sawr::cli;

  CLI::App app{"Syntax-aware neural machine translation toolkit"};
  app.set_help_flag("-h,--help", "Print this help and exit");
  std::string command;
  std::string config_path;
  app.add_option("command", command, command_help())->required();
  app.add_option("-c,--config", config_path, "key = value configuration file");

  std::map<std::string, std::string> overrides;
  for (const auto& f : schema()) {
    auto* opt = app.add_option_function<std::string>(
        "--" + f.name, [&overrides, name = f.name](const std::string& v) { overrides[name] = v; },
        f.doc + " [" + f.type + ", default " + (f.default_value.empty() ? "\"\"" : f.default_value) + "]");
    opt->group("Settings");
  }

  app.allow_extras();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  // Unrecognized --key options go to validation, which names the closest key.
  const auto extras = app.remaining();
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const auto& arg = extras[i];
    if (arg.rfind("--", 0) != 0) {
      std::cerr << "error: unexpected argument '" << arg << "'\n";
      return kValidation;
    }
    const auto eq = arg.find('=');
    if (eq != std::string::npos) {
      overrides[arg.substr(2, eq - 2)] = arg.substr(eq + 1);
    } else {
      overrides[arg.substr(2)] = i + 1 < extras.size() ? extras[++i] : "";
    }
  }

  try {
    std::map<std::string, std::string> raw;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << "error: cannot read config file " << config_path << '\n';
        return kData;
      }
      std::stringstream text;
      text << in.rdbuf();
      raw = parse_document(text.str());
    }
    const auto config = validate_config(raw, overrides);
    return run_command(command, config, std::cout, std::cerr);
  } catch (const sawr::ValidationError& e) {
    std::cerr << "error: invalid configuration: " << e.what() << '\n';
    return kValidation;
  }
}
