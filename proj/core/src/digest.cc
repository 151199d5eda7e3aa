#include "incidence/digest.h"

#include <array>
#include <fstream>
#include <memory>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

namespace incidence {

std::string Sha256Hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

std::string FileSha256(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return Sha256Hex(buffer.str());
}

std::string SystemDigest(const CoefficientSystem& system) {
  std::string payload = fmt::format("{}x{};", system.a.rows(), system.z.cols());
  auto append = [&payload](const auto& m) {
    payload.append(reinterpret_cast<const char*>(m.data()),
                   sizeof(double) * static_cast<std::size_t>(m.size()));
  };
  append(system.a);
  append(system.z);
  append(system.idi);
  append(system.fsf);
  return Sha256Hex(payload);
}

}  // namespace incidence
