// adlsim: simulate, fit, metrics, plotdata.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "adlsim/adlsim.hpp"

namespace fs = std::filesystem;
using namespace adlsim;

namespace {

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kRuntime = 3 };

// "bundled:<name>" selects a built-in document, anything else is a path.
struct Source {
  std::string text, label;
};

Source load_source(const std::string& arg, std::string_view what) {
  constexpr std::string_view kPrefix = "bundled:";
  if (arg.rfind(kPrefix, 0) == 0) {
    const std::string name = arg.substr(kPrefix.size());
    if (what == "layout" && name == "studio") return {std::string(kStudioLayout), arg};
    if (what == "profile" && name == "default") return {std::string(kDefaultProfile), arg};
    if (what == "profile" && name == "quiet") return {std::string(kQuietProfile), arg};
    if (what == "catalog") return {write_catalog(bundled_catalog(name)), arg};
    throw ConfigError("cli", "unknown bundled " + std::string(what) + " '" + name + "'");
  }
  return {text::read_file(arg), fs::absolute(arg).string()};
}

void write_text(const fs::path& p, const std::string& s) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  os << s;
  if (!os) throw Error("cli", "cannot write '" + p.string() + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic smart-home ADL, anomaly and sensor data generator"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate an output bundle");
  std::uint64_t seed = 1;
  int days = 7;
  double years = 0.0;
  std::string out = "adlsim_out", layout = "bundled:studio", catalog = "bundled:elderly", profile = "bundled:default";
  std::string manifest;
  bool no_sensors = false;
  sim->add_option("--seed", seed, "master seed");
  auto* days_opt = sim->add_option("--days", days, "horizon in days")->check(CLI::PositiveNumber);
  sim->add_option("--years", years, "horizon in years of 365 days")->excludes(days_opt)->check(CLI::PositiveNumber);
  sim->add_option("--out", out, "output directory (ADLSIM_OUT_DIR overrides)");
  sim->add_option("--layout", layout, "layout file or bundled:studio");
  sim->add_option("--catalog", catalog, "catalog CSV or bundled:elderly|kasteren|aruba");
  sim->add_option("--profile", profile, "anomaly profile or bundled:default|quiet");
  sim->add_option("--manifest", manifest, "re-run the configuration recorded in a manifest")->check(CLI::ExistingFile);
  sim->add_flag("--no-sensors", no_sensors, "write the sensor header only");

  // fit
  auto* fit = app.add_subcommand("fit", "clean a public dataset and fit catalog parameters");
  std::string input, format = "kasteren", tiers = "kasteren", fit_out = "fitted_catalog.csv", cleaned_out, start;
  int fit_days = 0;
  fit->add_option("input", input, "annotation file")->required()->check(CLI::ExistingFile);
  fit->add_option("--format", format, "kasteren, aruba or events (normal form or activities.csv)")
      ->check(CLI::IsMember({"kasteren", "aruba", "events"}));
  fit->add_option("--tiers", tiers, "tier config file or preset kasteren|aruba");
  fit->add_option("--out", fit_out, "fitted catalog CSV");
  fit->add_option("--cleaned", cleaned_out, "also write the cleaned sequence as events");
  fit->add_option("--start", start, "window start date YYYY-MM-DD");
  fit->add_option("--days", fit_days, "window length in days")->check(CLI::PositiveNumber);

  // metrics
  auto* met = app.add_subcommand("metrics", "similarity report against a reference sequence");
  std::string reference, met_catalog, met_out, sleep;
  std::vector<std::string> candidates;
  std::string freq = "1/60";
  int trials = 10;
  std::uint64_t met_seed = 1;
  met->add_option("--reference", reference, "reference sequence (activities.csv or events)")
      ->required()
      ->check(CLI::ExistingFile);
  met->add_option("--candidate", candidates, "candidate sequences")->check(CLI::ExistingFile);
  met->add_option("--catalog", met_catalog, "catalog for generated rows (proposed, RanD, RanS)");
  met->add_option("--freq", freq, "samples per second, e.g. 1/60");
  met->add_option("--trials", trials, "trials for generated rows")->check(CLI::PositiveNumber);
  met->add_option("--seed", met_seed, "master seed");
  met->add_option("--sleep", sleep, "sleep activity kept by RanS");
  met->add_option("--out", met_out, "write the report as CSV");

  // plotdata
  auto* plot = app.add_subcommand("plotdata", "per-figure tables from a bundle");
  std::string bundle, plot_out;
  plot->add_option("bundle", bundle, "bundle directory")->required()->check(CLI::ExistingDirectory);
  plot->add_option("--out", plot_out, "output directory (default <bundle>/plotdata)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*sim) {
      RunConfig cfg;
      if (!manifest.empty()) {
        cfg = config_from_manifest(text::read_file(manifest));
      } else {
        cfg.seed = seed;
        cfg.days = years > 0 ? static_cast<int>(std::llround(years * 365)) : days;
        const auto l = load_source(layout, "layout"), c = load_source(catalog, "catalog"),
                   p = load_source(profile, "profile");
        cfg.layout_text = l.text;
        cfg.layout_source = l.label;
        cfg.catalog_text = c.text;
        cfg.catalog_source = c.label;
        cfg.profile_text = p.text;
        cfg.profile_source = p.label;
      }
      cfg.write_sensors = !no_sensors;
      if (const char* env = std::getenv("ADLSIM_OUT_DIR"); env && *env) out = env;
      const auto s = run_simulation(cfg, out);
      std::cout << "wrote " << s.out_dir.string() << ": " << s.activities << " activities, " << s.labels
                << " labels, " << s.sensor_changes << " sensor frames in " << text::fixed(s.seconds, 2) << " s\n";
    } else if (*fit) {
      const auto doc = text::read_file(input);
      Cleaned cleaned;
      if (format == "kasteren") {
        KasterenOptions o;
        if (!start.empty()) o.window_start = parse_date(start);
        if (fit_days) o.days = fit_days;
        cleaned = preprocess_kasteren(parse_kasteren(doc), o);
      } else if (format == "aruba") {
        ArubaOptions o;
        if (!start.empty()) o.window_start = parse_date(start);
        if (fit_days) o.days = fit_days;
        std::vector<std::string> notes;
        cleaned = preprocess_aruba(parse_aruba(doc, &notes), o);
        cleaned.notes.insert(cleaned.notes.begin(), notes.begin(), notes.end());
      } else {
        cleaned.sequence = read_sequence(input);
      }
      const TierConfig tc = (tiers == "kasteren" || tiers == "aruba") ? tier_preset(tiers)
                                                                        : parse_tier_config(text::read_file(tiers));
      const auto report = fit_params(cleaned.sequence, tc);
      write_text(fit_out, write_catalog(report.catalog));
      if (!cleaned_out.empty()) write_text(cleaned_out, write_events(cleaned.events()));
      for (const auto& n : cleaned.notes) std::cerr << "note: " << n << "\n";
      for (const auto& n : report.notes) std::cerr << "note: " << n << "\n";
      std::cout << report.summary();
    } else if (*met) {
      MetricsConfig mc;
      mc.freq = text::to_double(freq, "freq");
      if (!(mc.freq > 0)) throw ConfigError("cli", "--freq must be positive");
      mc.trials = trials;
      mc.seed = met_seed;
      mc.sleep = sleep;
      const auto ref = read_sequence(reference);
      std::vector<std::pair<std::string, ActivitySequence>> cands;
      for (const auto& c : candidates) cands.emplace_back(fs::path(c).filename().string(), read_sequence(c));
      std::optional<Catalog> cat;
      if (!met_catalog.empty()) cat = parse_catalog(load_source(met_catalog, "catalog").text);
      const auto rows = run_metrics(ref, cat ? &*cat : nullptr, cands, mc);
      if (!met_out.empty()) write_text(met_out, metrics_csv(rows));
      std::cout << metrics_table(rows);
    } else if (*plot) {
      const fs::path dst = plot_out.empty() ? fs::path(bundle) / "plotdata" : fs::path(plot_out);
      export_plotdata(bundle, dst);
      std::cout << "wrote " << dst.string() << "\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "adlsim: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "adlsim: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}
