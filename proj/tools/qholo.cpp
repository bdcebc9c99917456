// Command-line front end: design, simulate, analyze, oracle, report, ingest.

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qholo/pipeline.hpp"

namespace {

using qholo::RunConfig;
namespace fs = std::filesystem;
namespace pl = qholo::pipeline;

/// Config file first, then any --<key> flags on top.
struct ConfigOptions {
  std::string file;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", file, "key=value config file")->check(CLI::ExistingFile);
    RunConfig probe;
    for (const auto& key : probe.keys())
      cmd->add_option_function<std::string>("--" + key,
                                            [this, key](const std::string& v) { overrides[key] = v; },
                                            "override config key " + key);
  }

  RunConfig load() const {
    RunConfig cfg = file.empty() ? RunConfig{} : RunConfig::from_file(file);
    cfg.apply(overrides);
    return cfg;
  }
};

std::optional<fs::path> opt_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return fs::path(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-photon holography simulation testbed"};
  app.require_subcommand(1);
  app.set_version_flag("--version", qholo::kToolVersion);

  std::string out = ".", hologram, signal, idler, compare, report_out, arm = "signal";
  std::vector<std::string> dirs, gray;
  bool shuffle = false;
  long long resume_from = -1;
  double threshold = 0.0;

  ConfigOptions c_design, c_sim, c_an, c_or;

  auto* design = app.add_subcommand("design", "design a binary phase hologram");
  c_design.attach(design);
  design->add_option("--out", out, "output directory");

  auto* simulate = app.add_subcommand("simulate", "generate signal/idler frame stacks");
  c_sim.attach(simulate);
  simulate->add_option("--hologram", hologram, "hologram PBM (default: design from config)");
  simulate->add_option("--out", out, "output directory");
  simulate->add_option("--resume-from", resume_from, "keep this many existing frames and continue");

  auto* analyze = app.add_subcommand("analyze", "sum-coordinate correlation of two stacks");
  c_an.attach(analyze);
  analyze->add_option("--signal", signal, "signal stack")->required();
  analyze->add_option("--idler", idler, "idler stack")->required();
  analyze->add_option("--out", out, "output directory");
  analyze->add_flag("--shuffle", shuffle, "also run the shifted-idler control");

  auto* oracle = app.add_subcommand("oracle", "analytic coincidence map");
  c_or.attach(oracle);
  oracle->add_option("--hologram", hologram, "hologram PBM (default: design from config)");
  oracle->add_option("--out", out, "output directory");
  oracle->add_option("--compare", compare, "PF32 map from analyze to compare against");

  auto* report = app.add_subcommand("report", "tabulate result CSVs of run directories");
  report->add_option("dirs", dirs, "run directories")->required();
  report->add_option("--out", report_out, "also write the table to this file");

  auto* ingest = app.add_subcommand("ingest", "threshold grayscale PGM frames into a stack");
  ingest->add_option("frames", gray, "PGM frames in order")->required();
  ingest->add_option("--threshold", threshold, "gray level above which a pixel counts")->required();
  ingest->add_option("--arm", arm, "signal or idler")->check(CLI::IsMember({"signal", "idler"}));
  ingest->add_option("--out", out, "output stack file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*design) {
      const auto r = pl::cmd_design(c_design.load(), out);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << r.hologram.string() << "\n";
    } else if (*simulate) {
      std::optional<std::uint64_t> resume;
      if (resume_from >= 0) resume = static_cast<std::uint64_t>(resume_from);
      const auto r = pl::cmd_simulate(c_sim.load(), opt_path(hologram), out, resume);
      std::cout << r.signal.string() << "\n" << r.idler.string() << "\n";
    } else if (*analyze) {
      const auto r = pl::cmd_analyze(c_an.load(), signal, idler, out, shuffle);
      std::cout << "degree=" << qholo::io::csv_number(r.stats.degree)
                << " peak_snr=" << qholo::io::csv_number(r.stats.peak_snr) << "\n";
    } else if (*oracle) {
      const auto r = pl::cmd_oracle(c_or.load(), opt_path(hologram), out, opt_path(compare));
      if (r.comparison)
        std::cout << "pearson=" << qholo::io::csv_number(r.comparison->pearson)
                  << " l2_rel=" << qholo::io::csv_number(r.comparison->l2_rel) << "\n";
    } else if (*report) {
      std::vector<fs::path> p(dirs.begin(), dirs.end());
      std::cout << pl::cmd_report(p, opt_path(report_out));
    } else if (*ingest) {
      std::vector<fs::path> p(gray.begin(), gray.end());
      const auto n = pl::cmd_ingest(p, threshold, arm == "idler" ? qholo::Arm::idler : qholo::Arm::signal, out);
      std::cout << n << " frames\n";
    }
  } catch (const qholo::Error& e) {
    std::cerr << "error: " << qholo::errc_name(e.code()) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: io_error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
