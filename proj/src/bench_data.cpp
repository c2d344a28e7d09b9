#include "slblr/bench_data.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace slblr {

namespace {

struct BenchmarkShape {
  Index machines;
  Index jobs;
  std::uint64_t seed;
};

const std::map<std::string, BenchmarkShape>& benchmark_catalog() {
  static const std::map<std::string, BenchmarkShape> catalog = {
      {"d05100", {5, 100, 0xd05100}},    {"d10100", {10, 100, 0xd10100}},
      {"d10400", {10, 400, 0xd10400}},   {"d201600", {20, 1600, 0xd201600}},
      {"d401600", {40, 1600, 0xd401600}}, {"d801600", {80, 1600, 0xd801600}},
  };
  return catalog;
}

}  // namespace

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("SLBLR_DATA_DIR"); env != nullptr && *env != '\0')
    return std::filesystem::path(env);
  return std::filesystem::path("data");
}

bool known_benchmark(const std::string& name) { return benchmark_catalog().count(name) > 0; }

std::filesystem::path ensure_benchmark_instance(const std::string& name,
                                                const std::filesystem::path& data_dir) {
  const auto it = benchmark_catalog().find(name);
  if (it == benchmark_catalog().end())
    throw ValidationError("unknown benchmark instance: " + name);

  std::filesystem::create_directories(data_dir);
  const std::filesystem::path file = data_dir / (name + ".txt");
  if (std::filesystem::exists(file)) return file;

  const auto& shape = it->second;
  const GapInstance instance = make_type_d_gap(shape.machines, shape.jobs, shape.seed);
  std::ofstream out(file);
  if (!out) throw ValidationError("cannot write " + file.string());
  out << serialize_orlib_gap({instance});
  return file;
}

GapInstance load_gap_instance(const std::filesystem::path& file, int index) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open " + file.string());
  OrlibParseOptions options;
  options.strict = false;
  std::vector<GapInstance> instances = parse_orlib_gap(in, options);
  if (index < 1 || static_cast<std::size_t>(index) > instances.size()) {
    std::ostringstream msg;
    msg << file.string() << " holds " << instances.size() << " instances; index " << index
        << " out of range";
    throw ValidationError(msg.str());
  }
  return std::move(instances[static_cast<std::size_t>(index - 1)]);
}

}  // namespace slblr
