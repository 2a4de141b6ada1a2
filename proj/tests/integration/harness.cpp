#include "harness.hpp"

#include <atomic>
#include <thread>

#include <csignal>
#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fmt/format.h>

#include "safechat/error.hpp"
#include "safechat/io.hpp"
#include "safechat/preprocess.hpp"
#include "scenarios.hpp"

extern char** environ;

namespace harness {

namespace {

std::filesystem::path scratch_dir() {
  static std::atomic<unsigned> counter{0};
  auto dir = std::filesystem::temp_directory_path() /
             fmt::format("safechat_proc_{}_{}", ::getpid(), counter++);
  std::filesystem::create_directories(dir);
  return dir;
}

pid_t spawn(const std::string& program, const std::vector<std::string>& args,
            const std::filesystem::path& in, const std::filesystem::path& out,
            const std::filesystem::path& err) {
  posix_spawn_file_actions_t fa;
  posix_spawn_file_actions_init(&fa);
  posix_spawn_file_actions_addopen(&fa, 0, in.c_str(), O_RDONLY, 0);
  posix_spawn_file_actions_addopen(&fa, 1, out.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
  posix_spawn_file_actions_addopen(&fa, 2, err.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
  std::vector<std::string> argv_store{program};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  argv.push_back(nullptr);
  pid_t pid = -1;
  const int rc = posix_spawn(&pid, program.c_str(), &fa, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&fa);
  if (rc != 0) throw safechat::Error(safechat::Errc::io, "cannot spawn " + program);
  return pid;
}

int decode(int status) {
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return -1;
}

}  // namespace

std::filesystem::path reference_bundle_path() {
  return std::filesystem::path(SAFECHAT_TEST_MODELS) / "reference.mtmb";
}

std::shared_ptr<const safechat::classify::EnsembleClassifier> reference_bundle() {
  static const auto bundle = std::make_shared<const safechat::classify::EnsembleClassifier>(
      safechat::classify::load_bundle(reference_bundle_path(),
                                      safechat::preprocess::Resources::load_directory(support::data_dir())));
  return bundle;
}

Output run(const std::string& program, const std::vector<std::string>& args, const std::string& input) {
  const auto dir = scratch_dir();
  safechat::io::write_file(dir / "in", input);
  const pid_t pid = spawn(program, args, dir / "in", dir / "out", dir / "err");
  int status = 0;
  ::waitpid(pid, &status, 0);
  Output o{decode(status), safechat::io::read_file(dir / "out"), safechat::io::read_file(dir / "err")};
  std::filesystem::remove_all(dir);
  return o;
}

Output cli(const std::vector<std::string>& args, const std::string& input) {
  return run(SAFECHAT_CLI, args, input);
}

Background::Background(const std::vector<std::string>& args) : dir_(scratch_dir()) {
  safechat::io::write_file(dir_ / "in", "");
  pid_ = spawn(SAFECHAT_CLI, args, dir_ / "in", dir_ / "out", dir_ / "err");
}

Background::~Background() {
  if (pid_ > 0) {
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
  }
  std::error_code ec;
  std::filesystem::remove_all(dir_, ec);
}

bool Background::wait_for_output(const std::string& needle, std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (std::chrono::steady_clock::now() < deadline) {
    if (out().find(needle) != std::string::npos) return true;
    int status = 0;
    if (pid_ > 0 && ::waitpid(pid_, &status, WNOHANG) == pid_) {
      status_ = decode(status);
      pid_ = -1;
      return out().find(needle) != std::string::npos;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  return false;
}

void Background::signal(int sig) {
  if (pid_ > 0) ::kill(pid_, sig);
}

int Background::wait() {
  if (pid_ > 0) {
    int status = 0;
    ::waitpid(pid_, &status, 0);
    status_ = decode(status);
    pid_ = -1;
  }
  return status_;
}

std::string Background::out() const { return safechat::io::read_file(dir_ / "out"); }
std::string Background::err() const { return safechat::io::read_file(dir_ / "err"); }

}  // namespace harness
