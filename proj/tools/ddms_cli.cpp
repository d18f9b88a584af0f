#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ddms/ddms.hpp"
#include "ddms/dms.hpp"
#include "ddms/field.hpp"
#include "ddms/oracle.hpp"

namespace {

using namespace ddms;

struct Options {
  std::string input;
  std::string generate;
  std::vector<Index> dims;
  std::string dtype = "f32";
  std::string engine = "dms";
  std::vector<std::string> diff;
  std::vector<int> split{1, 1, 1};
  int workers = 1;
  int threads = 1;
  std::string mode = "round";
  std::uint64_t seed = 0;
  std::string anticipation = "on";
  Index anticipation_budget = 0;
  Index send_threshold = 0;
  std::string output;
  std::string format = "csv";
  bool quiet = false;
};

struct Run {
  Diagram diagram;
  std::string stats;
};

std::string timings(const StepTimes& s) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "order=%.6f gradient=%.6f extract=%.6f d0=%.6f d2=%.6f d1=%.6f", s.order,
                s.gradient, s.extract, s.d0, s.d2, s.d1);
  return buf;
}

Run run_engine(const std::string& engine, const Grid& grid, const std::vector<double>& field, const Options& o) {
  Run r;
  std::ostringstream out;
  if (engine == "dms") {
    SingleOptions opts;
    opts.threads = o.threads;
    RunStats st;
    r.diagram = compute_diagram_single(grid, field, opts, &st);
    out << "dms: " << timings(st.seconds) << "\n"
        << "dms: critical=" << st.critical[0] << "," << st.critical[1] << "," << st.critical[2] << ","
        << st.critical[3] << " expansions=" << st.propagation.expansions << " merges=" << st.propagation.merges
        << " peak_boundary=" << st.propagation.peak_boundary_entries << "\n";
  } else if (engine == "ddms") {
    DistributedConfig c;
    c.layout = {o.split[0], o.split[1], o.split[2]};
    c.mode = o.mode == "eager" ? TransportMode::Eager : TransportMode::Round;
    c.seed = o.seed;
    c.workers = o.workers;
    c.anticipation = o.anticipation == "on";
    c.anticipation_budget = o.anticipation_budget;
    c.send_threshold = o.send_threshold;
    DistributedStats st;
    r.diagram = compute_diagram_distributed(grid, field, c, &st);
    out << "ddms: " << timings(st.seconds) << "\n"
        << "ddms: ranks=" << c.layout.ranks() << " messages=" << st.transport.messages
        << " rounds=" << st.transport.rounds << " trace_rounds=" << st.trace_rounds
        << " pairing_rounds=" << st.pairing_rounds << " recomputes=" << st.recomputes
        << " d1_rounds=" << st.d1_rounds << " tokens=" << st.tokens << " boundary_updates=" << st.boundary_updates
        << "\n";
    out << "ddms: resident_state=";
    for (std::size_t i = 0; i < st.resident_state.size(); ++i) out << (i ? "," : "") << st.resident_state[i];
    out << "\n";
  } else if (engine == "oracle") {
    const GlobalOrder order = order_sequential(field);
    r.diagram = reduce_matrix(grid, order, field);
    out << "oracle: finite=" << r.diagram.pairs.size() << " infinite=" << r.diagram.infinite.size() << "\n";
  } else {
    throw std::invalid_argument("unknown engine " + engine);
  }
  r.stats = out.str();
  return r;
}

void write_diagram(const Diagram& d, const Options& o) {
  auto emit = [&](std::ostream& s) {
    if (o.format == "json")
      write_json(s, d);
    else
      write_csv(s, d);
  };
  if (o.output.empty() || o.output == "-") {
    emit(std::cout);
    return;
  }
  std::ofstream f(o.output, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + o.output);
  emit(f);
  if (!f) throw std::runtime_error("failed writing " + o.output);
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  if (const char* env = std::getenv("DDMS_SEED")) o.seed = std::strtoull(env, nullptr, 10);

  CLI::App app{"Persistence diagrams of scalar fields on regular grids"};
  auto* source = app.add_option_group("source");
  source->add_option("-i,--input", o.input, "raw little-endian volume, x fastest");
  source->add_option("-g,--generate", o.generate, "synthetic field: elevation, wavelet, random, two-bump");
  source->require_option(1);
  app.add_option("-d,--dims", o.dims, "vertex counts nx ny [nz]")->required()->expected(1, 3)->delimiter(',');
  app.add_option("-t,--dtype", o.dtype, "f32, f64, u8, u16 or i16")->capture_default_str();
  app.add_option("-e,--engine", o.engine, "dms, ddms or oracle")
      ->check(CLI::IsMember({"dms", "ddms", "oracle"}))
      ->capture_default_str();
  app.add_option("--diff", o.diff, "compare the diagrams of several engines")
      ->expected(2, 3)
      ->check(CLI::IsMember({"dms", "ddms", "oracle"}));
  app.add_option("--split", o.split, "blocks per axis sx sy sz")->expected(3)->delimiter(',');
  app.add_option("-w,--workers", o.workers, "propagation workers per rank (eager mode)")->capture_default_str();
  app.add_option("--threads", o.threads, "gradient threads (dms)")->capture_default_str();
  app.add_option("-m,--mode", o.mode, "round or eager")->check(CLI::IsMember({"round", "eager"}))->capture_default_str();
  app.add_option("-s,--seed", o.seed, "field and schedule seed (default from DDMS_SEED)");
  app.add_option("--anticipation", o.anticipation, "on or off")->check(CLI::IsMember({"on", "off"}))->capture_default_str();
  app.add_option("--anticipation-budget", o.anticipation_budget, "fixed steps per token visit");
  app.add_option("--send-threshold", o.send_threshold, "fixed eager send threshold");
  app.add_option("-o,--output", o.output, "diagram file (stdout if omitted)");
  app.add_option("-f,--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  app.add_flag("-q,--quiet", o.quiet, "no statistics on stderr");
  CLI11_PARSE(app, argc, argv);

  try {
    GridShape shape;
    shape.nx = o.dims[0];
    if (o.dims.size() > 1) shape.ny = o.dims[1];
    if (o.dims.size() > 2) shape.nz = o.dims[2];
    const Grid grid(shape);
    const std::vector<double> field = o.input.empty() ? generate_field(parse_field_kind(o.generate), shape, o.seed)
                                                      : load_field(o.input, shape, parse_dtype(o.dtype));

    if (!o.diff.empty()) {
      std::vector<Run> runs;
      for (const std::string& e : o.diff) {
        runs.push_back(run_engine(e, grid, field, o));
        if (!o.quiet) std::cerr << runs.back().stats;
      }
      for (std::size_t k = 1; k < runs.size(); ++k) {
        const std::string why = describe_difference(runs[0].diagram, runs[k].diagram);
        if (!why.empty()) {
          std::cout << "MISMATCH " << o.diff[0] << " " << o.diff[k] << ": " << why << "\n";
          return 2;
        }
      }
      std::cout << "MATCH\n";
      return 0;
    }

    const Run r = run_engine(o.engine, grid, field, o);
    if (!o.quiet) std::cerr << r.stats;
    write_diagram(r.diagram, o);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
