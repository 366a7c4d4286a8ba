#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "error.hpp"
#include "grid.hpp"

namespace lognls {

namespace detail {

inline void put_le(std::ostream& os, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, sizeof bits);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  os.write(reinterpret_cast<const char*>(&bits), sizeof bits);
}

inline double get_le(const char* p) {
  std::uint64_t bits;
  std::memcpy(&bits, p, sizeof bits);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  double x;
  std::memcpy(&x, &bits, sizeof x);
  return x;
}

}  // namespace detail

inline nlohmann::json field_header(const Field& u) {
  const Grid& g = *u.grid;
  return {{"shape", to_string(g.shape())}, {"R", g.R()},       {"n", g.n()},
          {"h", g.h()},                    {"mass", mass(u)}, {"count", u.size()},
          {"layout", "row-major interior nodes, little-endian float64"}};
}

// Writes <base>.json (header) and <base>.f64 (payload); extra keys are merged into the header.
inline void write_field(const std::filesystem::path& base, const Field& u,
                        const nlohmann::json& extra = nlohmann::json::object()) {
  nlohmann::json head = field_header(u);
  std::filesystem::path payload = base;
  payload += ".f64";
  head["payload"] = payload.filename().string();
  for (const auto& [k, v] : extra.items()) head[k] = v;
  std::filesystem::path header = base;
  header += ".json";
  std::ofstream hs(header);
  std::ofstream ps(payload, std::ios::binary);
  if (!hs || !ps) fail(ErrorKind::io, "field io: cannot open " + base.string() + " for writing");
  hs << head.dump(2) << '\n';
  for (double x : u.v) detail::put_le(ps, x);
  if (!hs || !ps) fail(ErrorKind::io, "field io: write failed for " + base.string());
}

// Reads a field from its header path; the header must describe the payload exactly.
inline Field read_field(const std::filesystem::path& header) {
  std::ifstream hs(header);
  if (!hs) fail(ErrorKind::io, "field io: cannot open " + header.string());
  nlohmann::json head;
  try {
    hs >> head;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::io, std::string("field io: malformed header: ") + e.what());
  }
  Shape shape;
  double R = 0.0, h = 0.0;
  int n = 0;
  long long count = 0;
  std::string payload_name;
  try {
    shape = parse_shape(head.at("shape").get<std::string>());
    R = head.at("R").get<double>();
    n = head.at("n").get<int>();
    h = head.at("h").get<double>();
    count = head.at("count").get<long long>();
    payload_name = head.at("payload").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::io, std::string("field io: header missing or mistyped key: ") + e.what());
  } catch (const Error& e) {
    fail(ErrorKind::io, std::string("field io: ") + e.what());
  }
  GridPtr grid;
  try {
    grid = build_grid(shape, R, n);
  } catch (const Error& e) {
    fail(ErrorKind::io, std::string("field io: header describes no valid grid: ") + e.what());
  }
  if (grid->size() != count)
    fail(ErrorKind::io, "field io: header count " + std::to_string(count) +
                            " does not match the grid's " + std::to_string(grid->size()) +
                            " interior nodes");
  if (std::abs(grid->h() - h) > 1e-12 * grid->h())
    fail(ErrorKind::io, "field io: header spacing does not match (shape, R, n)");
  const std::filesystem::path payload = header.parent_path() / payload_name;
  std::ifstream ps(payload, std::ios::binary | std::ios::ate);
  if (!ps) fail(ErrorKind::io, "field io: cannot open payload " + payload.string());
  const auto bytes = static_cast<long long>(ps.tellg());
  if (bytes != count * 8)
    fail(ErrorKind::io, "field io: payload has " + std::to_string(bytes) + " bytes, expected " +
                            std::to_string(count * 8));
  ps.seekg(0);
  std::string buf(static_cast<std::size_t>(bytes), '\0');
  ps.read(buf.data(), bytes);
  if (!ps) fail(ErrorKind::io, "field io: short read on " + payload.string());
  Vec v(static_cast<std::size_t>(count));
  for (long long k = 0; k < count; ++k) v[k] = detail::get_le(buf.data() + 8 * k);
  return Field(grid, std::move(v));
}

}  // namespace lognls
