#include "fida/bridge.hpp"

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <csignal>
#include <cstdio>
#include <cstring>
#include <mutex>
#include <sstream>
#include <thread>

#include "fida/io.hpp"

extern char** environ;

namespace fida {

struct ExternalDenoiser::State {
  std::filesystem::path root;
  std::mutex mutex;
  std::filesystem::path dir;  // created on first call
  std::atomic<std::uint64_t> calls{0};

  ~State() {
    std::error_code ec;
    if (!dir.empty()) std::filesystem::remove(dir, ec);  // only succeeds when empty
  }

  std::filesystem::path ensure_dir() {
    std::lock_guard lock(mutex);
    if (dir.empty()) {
      std::string templ = (root / "fida-bridge-XXXXXX").string();
      if (!::mkdtemp(templ.data()))
        throw BridgeError("cannot create bridge directory under " + root.string() + ": " + std::strerror(errno));
      dir = templ;
    }
    return dir;
  }
};

namespace {

std::vector<std::string> split_command(const std::string& command) {
  std::istringstream is(command);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

}  // namespace

ExternalDenoiser::ExternalDenoiser(std::string command, std::chrono::milliseconds timeout,
                                   std::filesystem::path temp_root)
    : argv_(split_command(command)), timeout_(timeout), state_(std::make_shared<State>()) {
  if (argv_.empty()) throw std::invalid_argument("external denoiser: empty command");
  if (timeout_.count() <= 0) throw std::invalid_argument("external denoiser: timeout must be positive");
  state_->root = std::move(temp_root);
}

std::filesystem::path ExternalDenoiser::work_dir() const {
  std::lock_guard lock(state_->mutex);
  return state_->dir;
}

std::string ExternalDenoiser::format_lambda(double lambda) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", lambda);
  return buf;
}

Image ExternalDenoiser::run(const Image& input, double lambda) const {
  const auto dir = state_->ensure_dir();
  const std::uint64_t call = state_->calls++;
  const auto in_path = dir / ("in-" + std::to_string(call) + ".fidb");
  const auto out_path = dir / ("out-" + std::to_string(call) + ".fidb");
  write_fidb(input, in_path);

  std::vector<std::string> args = argv_;
  args.push_back(in_path.string());
  args.push_back(out_path.string());
  args.push_back(format_lambda(lambda));
  std::vector<char*> cargs;
  for (auto& a : args) cargs.push_back(a.data());
  cargs.push_back(nullptr);

  pid_t pid = 0;
  if (int rc = ::posix_spawnp(&pid, cargs[0], nullptr, nullptr, cargs.data(), environ); rc != 0)
    throw BridgeError("cannot launch external denoiser '" + argv_[0] + "': " + std::strerror(rc));

  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  int status = 0;
  auto pause = std::chrono::microseconds(200);
  for (;;) {
    const pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0 && errno != EINTR) throw BridgeError(std::string("waitpid failed: ") + std::strerror(errno));
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      throw BridgeError("external denoiser '" + argv_[0] + "' timed out after " + std::to_string(timeout_.count()) +
                        " ms (files kept in " + dir.string() + ")");
    }
    std::this_thread::sleep_for(pause);
    pause = std::min(pause * 2, std::chrono::microseconds(20000));
  }

  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    std::string why = WIFEXITED(status) ? "exit code " + std::to_string(WEXITSTATUS(status))
                                        : "signal " + std::to_string(WTERMSIG(status));
    throw BridgeError("external denoiser '" + argv_[0] + "' failed with " + why + " (files kept in " + dir.string() +
                      ")");
  }
  if (!std::filesystem::exists(out_path))
    throw BridgeError("external denoiser '" + argv_[0] + "' produced no output file " + out_path.string());
  Image out;
  try {
    out = read_fidb(out_path);
  } catch (const std::exception& e) {
    throw BridgeError(std::string("external denoiser output is malformed: ") + e.what());
  }
  if (out.shape() != input.shape())
    throw BridgeError("external denoiser output is " + to_string(out.shape()) + ", expected " +
                      to_string(input.shape()));
  std::error_code ec;
  std::filesystem::remove(in_path, ec);
  std::filesystem::remove(out_path, ec);
  return out;
}

}  // namespace fida
