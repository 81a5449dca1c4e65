#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "anisospec/cli.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  anisospec::cli::Options opt;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "run configuration file")
      ->required();
  cmd->add_option("--out", args.opt.out_dir, "output directory override");
  cmd->add_option("--seed", args.opt.seed, "seed override for randomized suites");
  cmd->add_option("--threads", args.opt.threads,
                  "concurrent sweep members override");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral-Galerkin solver and verification harness for the "
               "regularized anisotropic p(x,t)-parabolic equation"};
  app.require_subcommand(1);

  CommonArgs check_args, solve_args, sweep_args, mms_args, verify_args;
  auto* check = app.add_subcommand("check", "exponent admissibility report");
  add_common(check, check_args);
  auto* solve = app.add_subcommand("solve", "run one evolution");
  add_common(solve, solve_args);
  solve->add_flag("--force", solve_args.opt.force,
                  "solve even if the exponent check fails");
  auto* sweep = app.add_subcommand("sweep", "epsilon or mode sweep");
  add_common(sweep, sweep_args);
  auto* mms = app.add_subcommand("mms", "manufactured-solution convergence");
  add_common(mms, mms_args);
  auto* verify = app.add_subcommand("verify", "cross-module property suites");
  add_common(verify, verify_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : anisospec::cli::kUsageError;
  }

  auto run = [&](const CommonArgs& args,
                 int (*cmd)(const anisospec::RunConfig&,
                            const anisospec::cli::Options&, std::FILE*)) {
    try {
      const std::string text = anisospec::read_text_file(args.config_path);
      const anisospec::RunConfig cfg = anisospec::RunConfig::parse(text);
      return cmd(cfg, args.opt, stdout);
    } catch (const anisospec::ParseError& e) {
      std::fprintf(stderr, "parse error: %s\n", e.what());
      return anisospec::cli::kUsageError;
    } catch (const anisospec::InvalidArgument& e) {
      std::fprintf(stderr, "config error: %s\n", e.what());
      return anisospec::cli::kUsageError;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return anisospec::cli::kRuntimeFailure;
    }
  };

  if (check->parsed()) return run(check_args, anisospec::cli::cmd_check);
  if (solve->parsed()) return run(solve_args, anisospec::cli::cmd_solve);
  if (sweep->parsed()) return run(sweep_args, anisospec::cli::cmd_sweep);
  if (mms->parsed()) return run(mms_args, anisospec::cli::cmd_mms);
  if (verify->parsed()) return run(verify_args, anisospec::cli::cmd_verify);
  return anisospec::cli::kUsageError;
}
