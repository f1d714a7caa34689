#ifndef QRELENT_ERRORS_HPP
#define QRELENT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qrelent {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotFinite : Error {
  using Error::Error;
};
struct NonHermitian : Error {
  using Error::Error;
};
struct NotPositive : Error {
  using Error::Error;
};
struct NoConvergence : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};
struct ShapeMismatch : Error {
  using Error::Error;
};
struct ZeroOperator : Error {
  using Error::Error;
};
struct DegeneratePolar : Error {
  using Error::Error;
};
struct NegativeInput : Error {
  using Error::Error;
};
struct BothZero : Error {
  using Error::Error;
};
struct NonCommuting : Error {
  using Error::Error;
};
struct NotAProjector : Error {
  using Error::Error;
};
struct NotAPartialIsometry : Error {
  using Error::Error;
};
struct NotAnOperation : Error {
  using Error::Error;
};
struct NotAChannel : Error {
  using Error::Error;
};
struct NotAContraction : Error {
  using Error::Error;
};
struct ZeroSigma : Error {
  using Error::Error;
};
struct MTooSmall : Error {
  using Error::Error;
};
struct ZeroLimit : Error {
  using Error::Error;
};
struct RankOverflow : Error {
  using Error::Error;
};
struct BlockOverflow : Error {
  using Error::Error;
};
struct EnergyTooSmall : Error {
  using Error::Error;
};
struct InvalidWeights : Error {
  using Error::Error;
};
struct MalformedDocument : Error {
  using Error::Error;
};
struct ConfigInvalid : Error {
  using Error::Error;
};
struct UnknownCommand : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

}  // namespace qrelent

#endif  // QRELENT_ERRORS_HPP
