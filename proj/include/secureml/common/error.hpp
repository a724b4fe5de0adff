#pragma once

#include <stdexcept>
#include <string>

namespace secureml {

class Error : public std::runtime_error {
public:
    explicit Error(std::string msg) : std::runtime_error(std::move(msg)) {}
};

// Malformed canonical encodings (truncated buffers, bad magic, length overruns).
class DecodeError : public Error {
public:
    explicit DecodeError(std::string msg) : Error("decode: " + std::move(msg)) {}
};

class IoError : public Error {
public:
    explicit IoError(std::string msg) : Error("io: " + std::move(msg)) {}
};

} // namespace secureml
