#include "cotgan/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cotgan {

namespace {

constexpr char kMagic[4] = {'C', 'O', 'T', 'T'};
constexpr unsigned char kVersion = 1;

void put_u64_le(std::ostream& os, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(buf, 8);
}

std::uint64_t get_u64_le(std::istream& is) {
    char buf[8];
    is.read(buf, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
    return v;
}

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
    throw std::runtime_error("checkpoint: " + what + " in " + path.string());
}

}  // namespace

void write_tensor_file(const std::filesystem::path& path, const Tensor& t) {
    std::ofstream os(path, std::ios::binary);
    if (!os) fail(path, "cannot open for writing");
    os.write(kMagic, 4);
    os.put(static_cast<char>(kVersion));
    put_u64_le(os, static_cast<std::uint64_t>(t.rank()));
    for (index_t e : t.shape) put_u64_le(os, static_cast<std::uint64_t>(e));
    for (double v : t.data) put_u64_le(os, std::bit_cast<std::uint64_t>(v));
    if (!os) fail(path, "write failure");
}

Tensor read_tensor_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) fail(path, "cannot open for reading");
    char magic[4];
    is.read(magic, 4);
    if (!is || magic[0] != 'C' || magic[1] != 'O' || magic[2] != 'T' || magic[3] != 'T')
        fail(path, "bad magic");
    const int version = is.get();
    if (version != kVersion) fail(path, "unsupported format version " + std::to_string(version));
    const std::uint64_t rank = get_u64_le(is);
    if (!is || rank > 16) fail(path, "implausible rank");
    Shape shape;
    for (std::uint64_t i = 0; i < rank; ++i) {
        const std::uint64_t e = get_u64_le(is);
        if (!is || e == 0 || e > (1ULL << 40)) fail(path, "implausible extent");
        shape.push_back(static_cast<index_t>(e));
    }
    Tensor t(shape);
    for (double& v : t.data) {
        v = std::bit_cast<double>(get_u64_le(is));
        if (!is) fail(path, "truncated payload");
    }
    is.peek();
    if (!is.eof()) fail(path, "trailing bytes");
    return t;
}

void save_tensor_map(const std::filesystem::path& dir, const NamedTensors& tensors) {
    std::filesystem::create_directories(dir);
    std::ostringstream index;
    for (const auto& [name, tensor] : tensors) {
        if (name.empty() || name.find('/') != std::string::npos || name.find('\n') != std::string::npos)
            throw std::invalid_argument("save_tensor_map: invalid tensor name '" + name + "'");
        write_tensor_file(dir / (name + ".cott"), tensor);
        index << name << '\n';
    }
    write_text_file(dir / "tensors.txt", index.str());
}

NamedTensors load_tensor_map(const std::filesystem::path& dir) {
    std::istringstream index(read_text_file(dir / "tensors.txt"));
    NamedTensors out;
    std::string name;
    while (std::getline(index, name)) {
        if (name.empty()) continue;
        out.emplace_back(name, read_tensor_file(dir / (name + ".cott")));
    }
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) fail(path, "cannot open for writing");
    os << text;
    if (!os) fail(path, "write failure");
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) fail(path, "cannot open for reading");
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace cotgan
