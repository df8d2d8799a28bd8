#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "scintilla/cli/commands.hpp"

namespace {

using scintilla::cli::KeyValues;

struct Flags {
  std::string config;
  std::string out;
  std::string beta_min, beta_max, beta_steps;
  std::string k_list;
  std::string max_order;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "key=value configuration file");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--beta-min", f.beta_min, "smallest normalized distance");
  sub->add_option("--beta-max", f.beta_max, "largest normalized distance");
  sub->add_option("--beta-steps", f.beta_steps, "number of log-spaced distances");
  sub->add_option("--K", f.k_list, "comma-separated turbulence strengths");
  sub->add_option("--max-order", f.max_order, "highest series order");
}

KeyValues overrides(const Flags& f) {
  KeyValues kv;
  auto put = [&kv](const char* key, const std::string& v) {
    if (!v.empty()) kv[key] = v;
  };
  put("out", f.out);
  put("beta_min", f.beta_min);
  put("beta_max", f.beta_max);
  put("beta_steps", f.beta_steps);
  put("K", f.k_list);
  put("max_order", f.max_order);
  return kv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photon-number statistics of Gaussian beams in turbulence"};
  app.require_subcommand(1);
  Flags flags;
  auto* width = app.add_subcommand("width-curve", "width of the photon-number distribution versus distance");
  auto* dist = app.add_subcommand("distribution", "photon-number density across the detector plane");
  auto* verify = app.add_subcommand("verify", "compare closed forms with quadrature");
  for (auto* sub : {width, dist, verify}) add_common(sub, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : scintilla::cli::exit_config_error;
  }

  scintilla::cli::RunConfig cfg;
  try {
    std::optional<std::string> path;
    if (!flags.config.empty()) path = flags.config;
    cfg = scintilla::cli::resolve(path, overrides(flags));
  } catch (const scintilla::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return scintilla::cli::exit_config_error;
  }

  try {
    if (*width) return scintilla::cli::cmd_width_curve(cfg, std::cout);
    if (*dist) return scintilla::cli::cmd_distribution(cfg, std::cout);
    return scintilla::cli::cmd_verify(cfg, std::cout);
  } catch (const scintilla::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return scintilla::cli::exit_config_error;
  } catch (const scintilla::DomainError& e) {
    std::cerr << "invalid parameters: " << e.what() << '\n';
    return scintilla::cli::exit_config_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return scintilla::cli::exit_verification_failed;
  }
}
