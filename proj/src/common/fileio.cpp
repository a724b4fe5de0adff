#include "secureml/common/fileio.hpp"

#include <fstream>

#include "secureml/common/error.hpp"

namespace secureml {

Bytes read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open " + p.string());
    return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::string read_text_file(const std::filesystem::path& p) {
    const Bytes raw = read_file(p);
    return std::string(raw.begin(), raw.end());
}

void write_file(const std::filesystem::path& p, BytesView data) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + p.string());
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("short write to " + p.string());
}

void write_file(const std::filesystem::path& p, std::string_view text) {
    write_file(p, BytesView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void write_file_atomic(const std::filesystem::path& p, BytesView data) {
    std::filesystem::path tmp = p;
    tmp += ".tmp";
    write_file(tmp, data);
    std::filesystem::rename(tmp, p);
}

} // namespace secureml
