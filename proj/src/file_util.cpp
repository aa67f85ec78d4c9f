#include "ylr/file_util.hpp"

#include <fstream>
#include <sstream>

#include "ylr/errors.hpp"

namespace ylr {

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestionError("cannot open: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = path.parent_path() / (path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IngestionError("cannot open for writing: " + tmp.string());
        out << content;
        if (!out) throw IngestionError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace ylr
