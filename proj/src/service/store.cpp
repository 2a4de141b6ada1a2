#include <cerrno>
#include <cstring>

#include <fcntl.h>
#include <unistd.h>

#include "safechat/error.hpp"
#include "safechat/io.hpp"
#include "safechat/service.hpp"

namespace safechat::service {

namespace {

class Fd {
 public:
  explicit Fd(int fd) : fd_(fd) {}
  ~Fd() {
    if (fd_ >= 0) ::close(fd_);
  }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  int get() const noexcept { return fd_; }

 private:
  int fd_;
};

}  // namespace

ReportStore::ReportStore(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path_.parent_path(), ec);
  }
}

void ReportStore::append(const StoredReport& r) {
  const auto line = to_json_line(r) + '\n';
  std::lock_guard lock(mutex_);
  Fd fd(::open(path_.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0600));
  if (fd.get() < 0) {
    throw Error(Errc::io, "store: cannot open " + path_.string() + ": " + std::strerror(errno));
  }
  const auto written = ::write(fd.get(), line.data(), line.size());
  if (written != static_cast<ssize_t>(line.size())) {
    throw Error(Errc::io, "store: short write to " + path_.string());
  }
  if (::fsync(fd.get()) != 0) {
    throw Error(Errc::io, "store: fsync failed on " + path_.string() + ": " + std::strerror(errno));
  }
}

std::vector<StoredReport> ReportStore::read_all() const {
  std::vector<StoredReport> out;
  if (!std::filesystem::exists(path_)) return out;
  const auto data = io::read_file(path_);
  std::size_t pos = 0;
  while (pos < data.size()) {
    const auto nl = data.find('\n', pos);
    if (nl == std::string::npos) break;  // partial record from an interrupted write
    const std::string_view line(data.data() + pos, nl - pos);
    if (!line.empty()) out.push_back(report_from_json(line));
    pos = nl + 1;
  }
  return out;
}

bool ReportStore::writable() const {
  if (std::filesystem::exists(path_)) return ::access(path_.c_str(), W_OK) == 0;
  const auto dir = path_.has_parent_path() ? path_.parent_path() : std::filesystem::path(".");
  return ::access(dir.c_str(), W_OK) == 0;
}

}  // namespace safechat::service
