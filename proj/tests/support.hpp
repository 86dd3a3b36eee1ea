#pragma once

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace testing_support {

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("led-" + tag + "-" + std::to_string(rd()));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Byte-for-byte comparison of two directory trees.
inline bool same_tree(const fs::path& a, const fs::path& b, std::string* why = nullptr) {
    auto listing = [](const fs::path& root) {
        std::vector<fs::path> out;
        for (const auto& e : fs::recursive_directory_iterator(root)) out.push_back(fs::relative(e.path(), root));
        std::sort(out.begin(), out.end());
        return out;
    };
    const auto la = listing(a), lb = listing(b);
    if (la != lb) {
        if (why) *why = "file lists differ";
        return false;
    }
    for (const auto& rel : la) {
        if (fs::is_directory(a / rel)) continue;
        if (slurp(a / rel) != slurp(b / rel)) {
            if (why) *why = "content differs: " + rel.string();
            return false;
        }
    }
    return true;
}

// Runs a shell command, returning its exit status (-1 if it did not exit).
inline int run(const std::string& cmd) {
    const int rc = std::system(cmd.c_str());
    if (rc == -1 || !WIFEXITED(rc)) return -1;
    return WEXITSTATUS(rc);
}

}  // namespace testing_support
