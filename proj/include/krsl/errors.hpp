#pragma once

#include <stdexcept>
#include <string>

namespace krsl {

/// Parameter outside its admissible domain (e.g. sigma <= 0).
class parameter_error : public std::invalid_argument {
public:
    explicit parameter_error(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Operation applied to an empty sample set.
class empty_data_error : public std::invalid_argument {
public:
    explicit empty_data_error(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Data degenerate for the requested statistic (e.g. zero variance).
class degenerate_data_error : public std::invalid_argument {
public:
    explicit degenerate_data_error(const std::string& msg) : std::invalid_argument(msg) {}
};

class dimension_error : public std::invalid_argument {
public:
    explicit dimension_error(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Weighted Gram matrix numerically rank deficient.
class rank_deficiency_error : public std::runtime_error {
public:
    explicit rank_deficiency_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Quadrature self-check failed to reach the requested accuracy.
class accuracy_error : public std::runtime_error {
public:
    explicit accuracy_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Theoretical result does not apply in the requested regime
/// (violated assumption or log-domain condition).
class inapplicable_regime_error : public std::domain_error {
public:
    explicit inapplicable_regime_error(const std::string& msg) : std::domain_error(msg) {}
};

/// Steady-state formula denominator non-positive.
class stability_error : public std::runtime_error {
public:
    explicit stability_error(const std::string& msg) : std::runtime_error(msg) {}
};

class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

class no_solution_error : public std::runtime_error {
public:
    explicit no_solution_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace krsl
