#include "cmrf/io.hpp"

#include <bit>
#include <charconv>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

static_assert(std::endian::native == std::endian::little,
              "chain binary format assumes a little-endian host");

namespace cmrf {

using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

json lattice_to_json(const Lattice& lat) {
  json j;
  j["dims"] = lat.dims;
  j["nx"] = lat.nx;
  if (lat.dims == 2) j["ny"] = lat.ny;
  return j;
}

Lattice lattice_from_json(const json& j) {
  const int dims = j.at("dims").get<int>();
  if (dims == 1) return Lattice::line(j.at("nx").get<int>());
  return Lattice::grid(j.at("nx").get<int>(), j.at("ny").get<int>());
}

}  // namespace

void write_field_csv(const std::filesystem::path& path, const Field& f) {
  std::ofstream out = open_out(path);
  if (f.lattice.dims == 1) {
    out << "x,value\n";
    for (int i = 0; i < f.lattice.nx; ++i)
      out << format_double(f.lattice.x(i)) << ',' << format_double(f.values[i]) << '\n';
    return;
  }
  for (int i = 0; i < f.lattice.nx; ++i) {
    for (int j = 0; j < f.lattice.ny; ++j) {
      if (j) out << ',';
      out << format_double(f.values[f.lattice.index(i, j)]);
    }
    out << '\n';
  }
}

void write_columns_csv(const std::filesystem::path& path,
                       const std::vector<std::string>& names,
                       const std::vector<Eigen::VectorXd>& columns) {
  if (names.size() != columns.size())
    throw std::invalid_argument("names/columns size mismatch");
  std::ofstream out = open_out(path);
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (k) out << ',';
    out << names[k];
  }
  out << '\n';
  const Eigen::Index rows = columns.empty() ? 0 : columns[0].size();
  for (const auto& c : columns)
    if (c.size() != rows) throw std::invalid_argument("column length mismatch");
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < columns.size(); ++k) {
      if (k) out << ',';
      out << format_double(columns[k][r]);
    }
    out << '\n';
  }
}

void write_measurement_json(const std::filesystem::path& path, const Measurement& m) {
  json j;
  j["y"] = std::vector<double>(m.y.data(), m.y.data() + m.y.size());
  j["sigma"] = m.sigma;
  j["seed"] = m.seed;
  j["grid"] = lattice_to_json(m.data_grid);
  write_text_file(path, j.dump(2) + "\n");
}

Measurement read_measurement_json(const std::filesystem::path& path) {
  const json j = json::parse(read_text_file(path));
  Measurement m;
  const auto y = j.at("y").get<std::vector<double>>();
  m.y = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  m.sigma = j.at("sigma").get<double>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.data_grid = lattice_from_json(j.at("grid"));
  return m;
}

void write_chain(const std::filesystem::path& bin_path, const Chain& chain) {
  {
    std::ofstream out = open_out(bin_path, true);
    // Eigen stores column-major; emit row-major so rows are samples.
    for (int r = 0; r < chain.samples.rows(); ++r)
      for (int c = 0; c < chain.samples.cols(); ++c) {
        const double v = chain.samples(r, c);
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
      }
  }
  json j;
  j["algorithm"] = to_string(chain.algorithm);
  j["seed"] = chain.seed;
  j["thin"] = chain.thin;
  j["n_adapt"] = chain.n_adapt;
  j["rows"] = chain.samples.rows();
  j["cols"] = chain.samples.cols();
  j["acceptance_rate"] = chain.acceptance_rate;
  j["divergences"] = chain.divergences;
  j["ram_fallbacks"] = chain.ram_fallbacks;
  j["cholesky_retries"] = chain.cholesky_retries;
  if (chain.block_acceptance.size() > 0)
    j["block_acceptance"] =
        std::vector<double>(chain.block_acceptance.data(),
                            chain.block_acceptance.data() + chain.block_acceptance.size());
  if (chain.algorithm == SamplerAlgorithm::nuts) {
    j["final_step_size"] = chain.final_step_size;
    j["max_tree_states"] = chain.max_tree_states;
  }
  std::filesystem::path side = bin_path;
  side.replace_extension(".json");
  write_text_file(side, j.dump(2) + "\n");
}

Chain read_chain(const std::filesystem::path& bin_path) {
  std::filesystem::path side = bin_path;
  side.replace_extension(".json");
  const json j = json::parse(read_text_file(side));

  Chain chain;
  chain.algorithm = sampler_algorithm_from_string(j.at("algorithm").get<std::string>());
  chain.seed = j.at("seed").get<std::uint64_t>();
  chain.thin = j.at("thin").get<int>();
  chain.n_adapt = j.at("n_adapt").get<long>();
  chain.acceptance_rate = j.at("acceptance_rate").get<double>();
  chain.divergences = j.value("divergences", 0L);
  chain.ram_fallbacks = j.value("ram_fallbacks", 0L);
  const long rows = j.at("rows").get<long>();
  const long cols = j.at("cols").get<long>();
  if (j.contains("block_acceptance")) {
    const auto v = j["block_acceptance"].get<std::vector<double>>();
    chain.block_acceptance =
        Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }

  std::ifstream in(bin_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open chain: " + bin_path.string());
  chain.samples.resize(rows, cols);
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c) {
      double v;
      in.read(reinterpret_cast<char*>(&v), sizeof(v));
      if (!in) throw std::runtime_error("chain binary truncated: " + bin_path.string());
      chain.samples(r, c) = v;
    }
  return chain;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out = open_out(path, true);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace cmrf
