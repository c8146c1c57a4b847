#include "textio.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pidtwin/errors.hpp"

namespace pidtwin::detail {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UnreadableFile("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw UnreadableFile("read failed: " + path);
    return ss.str();
}

void write_text_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw UnreadableFile("cannot open file for writing: " + path);
    out.write(content.data(), std::streamsize(content.size()));
    out.flush();
    if (!out) throw UnreadableFile("write failed: " + path);
}

void atomic_write_text_file(const std::string& path, std::string_view content) {
    const std::string tmp = path + ".tmp";
    write_text_file(tmp, content);
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::remove(tmp.c_str());
        throw UnreadableFile("rename failed: " + tmp + " -> " + path + " (" + ec.message() +
                             ")");
    }
}

} // namespace pidtwin::detail
