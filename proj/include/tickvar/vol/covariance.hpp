#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tickvar/vol/linalg.hpp"

namespace tickvar::vol {

enum class Model { ewma, garch, har, realized };

inline const char* to_string(Model m) {
    switch (m) {
    case Model::ewma: return "EWMA";
    case Model::garch: return "GARCH";
    case Model::har: return "HAR";
    case Model::realized: return "REALIZED";
    }
    return "?";
}

inline std::optional<Model> parse_model(std::string_view s) {
    std::string up(s);
    for (char& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (up == "EWMA") return Model::ewma;
    if (up == "GARCH" || up == "DCC" || up == "DCC-GARCH") return Model::garch;
    if (up == "HAR" || up == "HAR-DRD") return Model::har;
    if (up == "REALIZED" || up == "EXPOST") return Model::realized;
    return std::nullopt;
}

// Horizon-scaled covariance of underlying index log returns.
struct CovarianceForecast {
    std::vector<std::string> syms;
    Matrix sigma;
    double horizon_days = 0.0;
    Model model = Model::ewma;
    bool psd_adjusted = false;

    Eigen::Index dim() const { return sigma.rows(); }

    Eigen::Index index_of(const std::string& sym) const {
        for (std::size_t i = 0; i < syms.size(); ++i)
            if (syms[i] == sym) return static_cast<Eigen::Index>(i);
        return -1;
    }
};

} // namespace tickvar::vol
