#pragma once

#include <stdexcept>
#include <string>

namespace dtopo {

enum class ErrorKind {
  PoleProximity,
  SigmaOutOfRange,
  InsideBand,
  WindowAtPole,
  UnpairedEdge,
  NotOnBand,
  DegenerateEdge,
  AmbiguousSymmetry,
  NonConvergent,
  MultipleRoots,
  RootAtEdge,
  BranchCrossing,
  MissingBaseline,
  InvalidInput,
  Config,
};

const char* to_string(ErrorKind k);

// Every library failure carries a kind so the CLI and sweeps can record it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dtopo
