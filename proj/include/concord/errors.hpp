#pragma once

#include <stdexcept>
#include <string>

namespace concord {

/// Error categories surfaced through exceptions. The CLI maps every one of
/// these to exit code 1; geometric "fail" verdicts are not errors and never
/// throw.
enum class errc {
  bounds,             // argument outside its documented range
  invalid_mesh,       // mesh invariant violated (degenerate triangle, ...)
  config,             // unknown name / malformed option
  incompatible_input, // operands built over different meshes, etc.
  precondition,       // documented operation precondition violated
  convergence,        // iterative solver did not converge
  solvability,        // singular/incompatible linear system
  assembly,           // matrix assembly failure
  integration,        // flow integration left the domain
  invalid_warp,       // non-positive lapse
  search_failure,     // parameter search exhausted its budget
  continuation,       // eigenfunction continuation failed
  degenerate_input,   // zero denominator and friends
  io,                 // file / JSON errors
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::bounds: return "bounds";
    case errc::invalid_mesh: return "invalid_mesh";
    case errc::config: return "config";
    case errc::incompatible_input: return "incompatible_input";
    case errc::precondition: return "precondition";
    case errc::convergence: return "convergence";
    case errc::solvability: return "solvability";
    case errc::assembly: return "assembly";
    case errc::integration: return "integration";
    case errc::invalid_warp: return "invalid_warp";
    case errc::search_failure: return "search_failure";
    case errc::continuation: return "continuation";
    case errc::degenerate_input: return "degenerate_input";
    case errc::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
public:
  Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, errc code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace concord
