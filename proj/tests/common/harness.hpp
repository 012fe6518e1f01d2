#pragma once

#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace harness {

struct CheckFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void expect(bool condition, const std::string& what) {
  if (!condition) throw CheckFailed(what);
}

/// Runs f and reports whether it threw an exception of type E.
template <typename E, typename F>
bool throws_as(F&& f) {
  try {
    f();
  } catch (const E&) {
    return true;
  } catch (...) {
    return false;
  }
  return false;
}

struct NamedCheck {
  std::string module;
  std::string name;
  std::function<void()> run;
};

/// Every fixed-value example of the library contract, one callable per example.
/// Each throws CheckFailed (or the library's own exception) on failure.
std::vector<NamedCheck> trivial_examples();

/// Fresh empty directory under the system temp directory.
std::filesystem::path scratch_dir(const std::string& tag);

struct CliResult {
  int exit_code = 0;
  std::string out;
  std::string err;
};

/// Runs the command-line tool in-process with stdout/stderr captured.
CliResult run_cli(const std::vector<std::string>& args);

std::string read_file(const std::filesystem::path& path);

}  // namespace harness
