#include "dtopo/errors.hpp"

namespace dtopo {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::PoleProximity: return "PoleProximity";
    case ErrorKind::SigmaOutOfRange: return "SigmaOutOfRange";
    case ErrorKind::InsideBand: return "InsideBand";
    case ErrorKind::WindowAtPole: return "WindowAtPole";
    case ErrorKind::UnpairedEdge: return "UnpairedEdge";
    case ErrorKind::NotOnBand: return "NotOnBand";
    case ErrorKind::DegenerateEdge: return "DegenerateEdge";
    case ErrorKind::AmbiguousSymmetry: return "AmbiguousSymmetry";
    case ErrorKind::NonConvergent: return "NonConvergent";
    case ErrorKind::MultipleRoots: return "MultipleRoots";
    case ErrorKind::RootAtEdge: return "RootAtEdge";
    case ErrorKind::BranchCrossing: return "BranchCrossing";
    case ErrorKind::MissingBaseline: return "MissingBaseline";
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::Config: return "Config";
  }
  return "Unknown";
}

}  // namespace dtopo
