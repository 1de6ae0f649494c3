#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace omdce {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<cxd>;

// Every user-facing failure carries a short category tag so the CLI can
// report "error[<category>]: message" and scripts can branch on it.
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& msg)
        : std::runtime_error(msg), category_(std::move(category)) {}
    const std::string& category() const { return category_; }

private:
    std::string category_;
};

inline Error config_error(const std::string& msg)     { return Error("config", msg); }
inline Error io_error(const std::string& msg)         { return Error("io", msg); }
inline Error numeric_error(const std::string& msg)    { return Error("numeric", msg); }
inline Error resonance_error(const std::string& msg)  { return Error("resonance", msg); }
inline Error truncation_error(const std::string& msg) { return Error("truncation", msg); }
inline Error usage_error(const std::string& msg)      { return Error("usage", msg); }

} // namespace omdce
