#pragma once

#include <Eigen/Dense>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "slicedist/gaussian_mixture.hpp"
#include "slicedist/sample_set.hpp"
#include "slicedist/slice_plan.hpp"

namespace slicedist {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace detail

// Writes content to a temporary file in the target directory, then renames
// it into place, so readers never observe a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

// CSV sample format: one point per row, n columns, '.' decimal, no header.
inline SampleSet load_samples_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            std::size_t consumed = 0;
            double value = 0.0;
            try {
                value = std::stod(cell, &consumed);
            } catch (const std::exception&) {
                throw IoError(path.string() + ":" + std::to_string(lineno) +
                              ": cannot parse '" + cell + "' as a number");
            }
            row.push_back(value);
        }
        if (!rows.empty() && row.size() != rows[0].size())
            throw IoError(path.string() + ":" + std::to_string(lineno) +
                          ": inconsistent column count");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError(path.string() + ": no data rows");
    Eigen::MatrixXd points(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    try {
        return SampleSet(std::move(points));
    } catch (const std::invalid_argument& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

inline void save_samples_csv(const std::filesystem::path& path, const SampleSet& samples) {
    std::ostringstream out;
    out.precision(17);
    for (Eigen::Index i = 0; i < samples.size(); ++i) {
        for (Eigen::Index j = 0; j < samples.dimension(); ++j) {
            if (j) out << ',';
            out << samples.points()(i, j);
        }
        out << '\n';
    }
    write_file_atomic(path, out.str());
}

// JSON sample format: {"n": int, "points": [[...], ...]}.
inline SampleSet load_samples_json(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(detail::read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    try {
        const auto n = j.at("n").get<Eigen::Index>();
        const auto& pts = j.at("points");
        if (pts.empty()) throw IoError(path.string() + ": points must be nonempty");
        Eigen::MatrixXd points(pts.size(), n);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (static_cast<Eigen::Index>(pts[i].size()) != n)
                throw IoError(path.string() + ": point " + std::to_string(i) +
                              " does not have n coordinates");
            for (Eigen::Index k = 0; k < n; ++k)
                points(static_cast<Eigen::Index>(i), k) = pts[i][static_cast<std::size_t>(k)].get<double>();
        }
        return SampleSet(std::move(points));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

inline SampleSet load_samples(const std::filesystem::path& path) {
    if (path.extension() == ".json") return load_samples_json(path);
    return load_samples_csv(path);
}

// GMM JSON format:
// {"weights":[...], "components":[{"mean":[...], "cov":[[...],...]}, ...]}
inline GaussianMixture load_gmm_json(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(detail::read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    try {
        std::vector<double> weights = j.at("weights").get<std::vector<double>>();
        std::vector<GaussianComponent> components;
        for (const auto& cj : j.at("components")) {
            GaussianComponent c;
            const auto mean = cj.at("mean").get<std::vector<double>>();
            c.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(),
                                                       static_cast<Eigen::Index>(mean.size()));
            const auto& cov = cj.at("cov");
            c.covariance.resize(static_cast<Eigen::Index>(cov.size()),
                                static_cast<Eigen::Index>(cov.size()));
            for (std::size_t r = 0; r < cov.size(); ++r) {
                if (cov[r].size() != cov.size())
                    throw IoError(path.string() + ": cov must be square");
                for (std::size_t s = 0; s < cov.size(); ++s)
                    c.covariance(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) =
                        cov[r][s].get<double>();
            }
            components.push_back(std::move(c));
        }
        return GaussianMixture(std::move(components), std::move(weights));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

inline nlohmann::json gmm_to_json(const GaussianMixture& gmm) {
    nlohmann::json j;
    j["weights"] = gmm.weights();
    j["components"] = nlohmann::json::array();
    for (const auto& c : gmm.components()) {
        nlohmann::json cj;
        cj["mean"] = std::vector<double>(c.mean.data(), c.mean.data() + c.mean.size());
        nlohmann::json cov = nlohmann::json::array();
        for (Eigen::Index r = 0; r < c.covariance.rows(); ++r) {
            std::vector<double> row(static_cast<std::size_t>(c.covariance.cols()));
            for (Eigen::Index s = 0; s < c.covariance.cols(); ++s)
                row[static_cast<std::size_t>(s)] = c.covariance(r, s);
            cov.push_back(row);
        }
        cj["cov"] = cov;
        j["components"].push_back(cj);
    }
    return j;
}

// Plan serialization so an experiment can freeze and reuse its evaluation
// plan across runs.
inline nlohmann::json plan_to_json(const SlicePlan& plan) {
    nlohmann::json j;
    j["slices"] = nlohmann::json::array();
    for (const auto& s : plan.slices) {
        nlohmann::json sj;
        sj["direction"] = std::vector<double>(
            s.direction.coords().data(),
            s.direction.coords().data() + s.direction.coords().size());
        sj["thresholds"] = s.thresholds;
        j["slices"].push_back(sj);
    }
    return j;
}

inline SlicePlan plan_from_json(const nlohmann::json& j) {
    SlicePlan plan;
    for (const auto& sj : j.at("slices")) {
        const auto coords = sj.at("direction").get<std::vector<double>>();
        Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(
            coords.data(), static_cast<Eigen::Index>(coords.size()));
        plan.slices.push_back(
            {Direction::normalized(std::move(v)), sj.at("thresholds").get<std::vector<double>>()});
    }
    return plan;
}

} // namespace slicedist
