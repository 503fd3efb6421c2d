#pragma once

#include <stdexcept>
#include <string>

namespace tspca {

// Base of all library errors. The two families below drive the CLI exit-code
// mapping: InputError for bad data/flags/files, NumericError when the math
// cannot proceed.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class InputError : public Error {
public:
  using Error::Error;
};

class NumericError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

class NonFiniteError : public InputError {
public:
  NonFiniteError(long instance, long time, long variable)
      : InputError("non-finite value at (instance=" + std::to_string(instance) +
                   ", time=" + std::to_string(time) +
                   ", variable=" + std::to_string(variable) + ")"),
        instance(instance), time(time), variable(variable) {}
  long instance;
  long time;
  long variable;
};

class ShapeMismatchError : public InputError {
public:
  using InputError::InputError;
};

class IndexOutOfRangeError : public InputError {
public:
  using InputError::InputError;
};

class BadDimensionsError : public InputError {
public:
  using InputError::InputError;
};

class BadCounterError : public InputError {
public:
  using InputError::InputError;
};

// Signals degenerate data or a component count the data cannot support.
class RankDeficientError : public NumericError {
public:
  using NumericError::NumericError;
};

class NotSymmetricError : public InputError {
public:
  using InputError::InputError;
};

class NotOrthonormalError : public InputError {
public:
  using InputError::InputError;
};

class ZeroDataError : public InputError {
public:
  using InputError::InputError;
};

class DimensionMismatchError : public InputError {
public:
  using InputError::InputError;
};

class UnlabeledError : public InputError {
public:
  using InputError::InputError;
};

class ParseError : public InputError {
public:
  ParseError(long line, long column, const std::string& detail)
      : InputError("parse error at line " + std::to_string(line) + ", column " +
                   std::to_string(column) + ": " + detail),
        line(line), column(column) {}
  long line;
  long column;
};

class MissingCellError : public InputError {
public:
  MissingCellError(long instance, long time)
      : InputError("missing cell for (instance=" + std::to_string(instance) +
                   ", time=" + std::to_string(time) + ")"),
        instance(instance), time(time) {}
  long instance;
  long time;
};

class RaggedRowError : public InputError {
public:
  RaggedRowError(long line, const std::string& detail)
      : InputError("ragged row at line " + std::to_string(line) + ": " + detail),
        line(line) {}
  long line;
};

class InconsistentLabelError : public InputError {
public:
  InconsistentLabelError(long instance, const std::string& detail)
      : InputError("inconsistent label for instance " + std::to_string(instance) +
                   ": " + detail),
        instance(instance) {}
  long instance;
};

class UnsupportedFeatureError : public InputError {
public:
  using InputError::InputError;
};

class MetadataMissingError : public InputError {
public:
  using InputError::InputError;
};

}  // namespace tspca
