#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "fida/image.hpp"

namespace fida {

/// Runs an out-of-process denoiser with the file protocol
///
///   <command...> <input.fidb> <output.fidb> <lambda>
///
/// The input is written before launch. Exit status 0 with an output file of
/// the same dimensions is success; any other outcome throws BridgeError.
/// Files live in a private temporary directory that is removed when the last
/// copy of the bridge goes away; a failed call leaves its files behind for
/// inspection.
class ExternalDenoiser {
 public:
  /// `command` is split on whitespace; the first token is the executable
  /// (looked up in PATH when it has no slash).
  explicit ExternalDenoiser(std::string command, std::chrono::milliseconds timeout = std::chrono::seconds(120),
                            std::filesystem::path temp_root = std::filesystem::temp_directory_path());

  Image run(const Image& input, double lambda) const;

  const std::vector<std::string>& argv() const { return argv_; }
  std::chrono::milliseconds timeout() const { return timeout_; }
  std::filesystem::path work_dir() const;

  /// Decimal text passed as the lambda argument; round-trips the double.
  static std::string format_lambda(double lambda);

 private:
  struct State;
  std::vector<std::string> argv_;
  std::chrono::milliseconds timeout_;
  std::shared_ptr<State> state_;
};

class BridgeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fida
