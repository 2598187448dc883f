#pragma once

#include <stdexcept>
#include <string>

namespace ssodat {

// Input violated a documented precondition or invariant.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

// Scoring was requested on an empty proposal or pair set; the caller must
// route the image elsewhere (unscorable / I_diff) instead of scoring it.
class no_proposals_error : public validation_error {
public:
    using validation_error::validation_error;
};

// Diversity was requested against a bank with no present class.
class cold_bank_error : public validation_error {
public:
    using validation_error::validation_error;
};

class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ssodat
