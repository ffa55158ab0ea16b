// Command-line driver: convergence studies and the quick self-test.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "wavestruct/scenarios.hpp"
#include "wavestruct/selftest.hpp"

namespace ws = wavestruct;
namespace sc = wavestruct::scenarios;

namespace {

struct StudyFlags {
  std::string config;
  std::string scheme;
  std::vector<int> n, m;
  double tfinal = 0.0;
  std::string out;
  std::string dump_signals;
  int threads = 0;
  bool quiet = false;
};

void add_study_flags(CLI::App* cmd, StudyFlags& f) {
  cmd->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--scheme", f.scheme, "CQ scheme")->check(CLI::IsMember({"bdf2", "tr"}));
  cmd->add_option("--n", f.n, "ladder N values (panels, or refinement level when coupled)");
  cmd->add_option("--m", f.m, "ladder M values (time steps)");
  cmd->add_option("--tfinal", f.tfinal, "final time")->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out, "CSV report path");
  cmd->add_option("--dump-signals", f.dump_signals, "time-series CSV path");
  cmd->add_option("--threads", f.threads, "frequency-solve threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--quiet", f.quiet, "no progress lines");
}

int run_study(sc::Formulation form, const StudyFlags& f) {
  sc::ScenarioConfig cfg;
  if (!f.config.empty()) {
    cfg = sc::load_config(f.config);
    if (cfg.formulation != form) {
      throw ws::ParameterError("config formulation does not match the subcommand");
    }
  } else {
    const auto scheme = f.scheme.empty() ? ws::cq::Scheme::TR : ws::cq::parse_scheme(f.scheme);
    cfg = form == sc::Formulation::Bie ? sc::disk_study(scheme) : sc::rectangle_study(scheme);
  }
  if (!f.scheme.empty()) cfg.scheme = ws::cq::parse_scheme(f.scheme);
  if (!f.n.empty() || !f.m.empty()) {
    if (f.n.size() != f.m.size()) throw ws::ParameterError("--n and --m need the same count");
    cfg.ladder.clear();
    for (size_t i = 0; i < f.n.size(); ++i) cfg.ladder.push_back({f.n[i], f.m[i]});
  }
  if (f.tfinal > 0.0) cfg.final_time = f.tfinal;
  if (!f.out.empty()) cfg.output = f.out;
  if (f.threads > 0) cfg.threads = f.threads;
  cfg.validate();

  sc::RunOptions opt;
  opt.keep_signals = !f.dump_signals.empty();
  if (!f.quiet) opt.log = [](const std::string& s) { std::cerr << s << '\n'; };
  const auto report = sc::run_convergence(cfg, opt);

  std::ofstream csv(cfg.output);
  if (!csv) throw std::runtime_error("cannot write " + cfg.output);
  sc::write_report_csv(csv, report);
  std::ofstream meta(std::filesystem::path(cfg.output).replace_extension(".json"));
  sc::write_report_metadata(meta, report);
  if (opt.keep_signals) {
    std::ofstream sig(f.dump_signals);
    if (!sig) throw std::runtime_error("cannot write " + f.dump_signals);
    sc::write_signals_csv(sig, report);
  }
  sc::write_report_csv(std::cout, report);
  for (const auto& r : report.rows) {
    if (!r.ok) return 1;
  }
  return 0;
}

int run_selftest() {
  bool ok = true;
  for (const auto& c : ws::selftest::run_all()) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
    ok = ok && c.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transient acoustic-elastic scattering: convergence studies"};
  app.require_subcommand(1);
  StudyFlags bie_flags, coupled_flags;
  auto* bie = app.add_subcommand("bie", "boundary-integral study on the disk");
  add_study_flags(bie, bie_flags);
  auto* coupled = app.add_subcommand("coupled", "FEM-BEM study on the rectangle");
  add_study_flags(coupled, coupled_flags);
  auto* self = app.add_subcommand("selftest", "fast invariant checks");
  CLI11_PARSE(app, argc, argv);
  try {
    if (*bie) return run_study(sc::Formulation::Bie, bie_flags);
    if (*coupled) return run_study(sc::Formulation::Coupled, coupled_flags);
    if (*self) return run_selftest();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
