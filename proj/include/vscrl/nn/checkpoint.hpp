#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "vscrl/core/hash.hpp"
#include "vscrl/nn/mlp.hpp"

namespace vscrl::nn {

// Binary layout, all integers and doubles little-endian:
//   "VSCRLNN1"                 8-byte magic
//   u32 n_sizes, u32 sizes[n_sizes]
//   u32 activation tag         (0 relu, 1 tanh, 2 identity)
//   u64 n_params, f64 params[n_params]
// A text manifest next to it (<path>.manifest) records shapes and the FNV-1a
// hash of the parameter bytes.
inline constexpr char kCheckpointMagic[8] = {'V', 'S', 'C', 'R', 'L', 'N', 'N', '1'};

namespace detail {
inline void put_u32(std::ostream& os, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u64(std::ostream& os, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline std::uint64_t get_le(std::istream& is, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    const int c = is.get();
    if (c == EOF) throw Error("corrupt-checkpoint", "truncated file");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}
}  // namespace detail

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

inline std::uint64_t parameter_hash(const MlpNet& net) { return fnv1a(net.parameters()); }

inline void save_checkpoint(const MlpNet& net, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("io-error", "cannot write " + path);
  os.write(kCheckpointMagic, sizeof kCheckpointMagic);
  detail::put_u32(os, static_cast<std::uint32_t>(net.sizes().size()));
  for (int s : net.sizes()) detail::put_u32(os, static_cast<std::uint32_t>(s));
  detail::put_u32(os, static_cast<std::uint32_t>(net.activation()));
  detail::put_u64(os, net.parameter_count());
  for (double p : net.parameters()) detail::put_u64(os, std::bit_cast<std::uint64_t>(p));
  if (!os) throw Error("io-error", "write failed for " + path);

  std::ofstream man(path + ".manifest");
  man << "format: VSCRLNN1\nlayers:";
  for (int s : net.sizes()) man << ' ' << s;
  man << "\nactivation: " << to_string(net.activation())
      << "\nparameters: " << net.parameter_count()
      << "\nfnv1a64: " << hex64(parameter_hash(net)) << '\n';
}

inline MlpNet load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("missing-checkpoint", path);
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
    throw Error("corrupt-checkpoint", "bad magic in " + path);
  }
  const auto n_sizes = detail::get_le(is, 4);
  if (n_sizes < 2 || n_sizes > 64) throw Error("corrupt-checkpoint", "bad layer count");
  std::vector<int> sizes;
  for (std::uint64_t i = 0; i < n_sizes; ++i) sizes.push_back(static_cast<int>(detail::get_le(is, 4)));
  const auto act = detail::get_le(is, 4);
  if (act > 2) throw Error("corrupt-checkpoint", "bad activation tag");
  MlpNet net(sizes, static_cast<Activation>(act), 0);
  const auto n_params = detail::get_le(is, 8);
  if (n_params != net.parameter_count()) throw Error("corrupt-checkpoint", "parameter count mismatch");
  auto params = net.parameters();
  for (auto& p : params) p = std::bit_cast<double>(detail::get_le(is, 8));
  return net;
}

}  // namespace vscrl::nn
