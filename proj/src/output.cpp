#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <vector>

#include "apspic/experiments.hpp"
#include "output_util.hpp"

namespace apspic {

namespace detail {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file " + path.string());
  return out;
}

void write_manifest(const std::filesystem::path& out_dir, const nlohmann::json& config, const std::string& status,
                    const nlohmann::json& extra) {
  nlohmann::json m{{"version", version()}, {"status", status}, {"config", config}};
  for (const auto& [k, v] : extra.items()) m[k] = v;
  auto out = open_output(out_dir / "manifest.json");
  out << m.dump(2) << '\n';
}

}  // namespace detail

std::string version() { return APSPIC_VERSION; }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::filesystem::path sidecar_path(const std::filesystem::path& bin_path) {
  std::filesystem::path p = bin_path;
  p.replace_extension(".json");
  return p;
}

std::uint64_t to_little_endian(std::uint64_t bits) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(bits);
  return bits;
}

}  // namespace

void write_snapshot(const ScalarField& rho, double t, std::size_t step, const std::filesystem::path& bin_path) {
  const Grid2D& g = rho.grid;
  {
    auto out = detail::open_output(bin_path);
    std::vector<std::uint64_t> raw(static_cast<std::size_t>(g.size()));
    for (Eigen::Index k = 0; k < g.size(); ++k) raw[k] = to_little_endian(std::bit_cast<std::uint64_t>(rho.values[k]));
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 8));
    if (!out) throw std::runtime_error("failed writing snapshot " + bin_path.string());
  }
  const nlohmann::json meta{{"version", version()},
                            {"t", t},
                            {"step", step},
                            {"nx", g.nx()},
                            {"ny", g.ny()},
                            {"xmin", g.xmin()},
                            {"xmax", g.xmax()},
                            {"ymin", g.ymin()},
                            {"ymax", g.ymax()},
                            {"dtype", "float64"},
                            {"byte_order", "little"},
                            {"layout", "row-major, index i*ny + j, i along x"},
                            {"file", bin_path.filename().string()}};
  auto side = detail::open_output(sidecar_path(bin_path));
  side << meta.dump(2) << '\n';
}

ScalarField read_snapshot(const std::filesystem::path& bin_path) {
  std::ifstream side(sidecar_path(bin_path));
  if (!side) throw std::runtime_error("missing snapshot sidecar for " + bin_path.string());
  const nlohmann::json meta = nlohmann::json::parse(side);
  if (meta.at("dtype") != "float64" || meta.at("byte_order") != "little")
    throw std::runtime_error("unsupported snapshot encoding in " + bin_path.string());
  const Grid2D g(meta.at("xmin").get<double>(), meta.at("xmax").get<double>(), meta.at("ymin").get<double>(),
                 meta.at("ymax").get<double>(), meta.at("nx").get<Eigen::Index>(), meta.at("ny").get<Eigen::Index>());

  std::ifstream in(bin_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open snapshot " + bin_path.string());
  std::vector<std::uint64_t> raw(static_cast<std::size_t>(g.size()));
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 8));
  if (in.gcount() != static_cast<std::streamsize>(raw.size() * 8) || in.peek() != std::char_traits<char>::eof())
    throw std::runtime_error("snapshot size does not match its sidecar: " + bin_path.string());
  ScalarField rho(g);
  for (Eigen::Index k = 0; k < g.size(); ++k) rho.values[k] = std::bit_cast<double>(to_little_endian(raw[k]));
  return rho;
}

}  // namespace apspic
