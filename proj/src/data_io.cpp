#include "qmc/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>

#include "qmc/error.hpp"

namespace qmc {
namespace {

std::vector<std::string> split_fields(const std::string& line, char delimiter)
{
    std::vector<std::string> fields;
    if (delimiter == ' ') {
        std::istringstream in(line);
        std::string f;
        while (in >> f) {
            fields.push_back(f);
        }
        return fields;
    }
    std::string current;
    for (char c : line) {
        if (c == delimiter) {
            fields.push_back(current);
            current.clear();
        } else if (c != '\r') {
            current.push_back(c);
        }
    }
    fields.push_back(current);
    return fields;
}

template <typename T>
T parse_number(const std::string& s, std::size_t line, const char* what)
{
    T value{};
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw ParseError(std::string("invalid ") + what + " '" + s + "'", line);
    }
    return value;
}

std::ifstream open_input(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open " + path.string());
    }
    return in;
}

std::ofstream open_output(const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    return out;
}

}  // namespace

QuantizationScheme movielens_scheme()
{
    return QuantizationScheme::uniform(1.0, 1.0, 5);
}

ObservedMatrix RatingsDataset::to_observed() const
{
    std::vector<Observation> obs;
    obs.reserve(records.size());
    for (const auto& r : records) {
        obs.push_back({r.user, r.item, r.level});
    }
    return ObservedMatrix(user_count, item_count, std::move(obs), scheme);
}

RatingsDataset load_ratings(const std::filesystem::path& path, char delimiter,
                            const QuantizationScheme& scheme, std::optional<std::size_t> users,
                            std::optional<std::size_t> items)
{
    auto in = open_input(path);
    RatingsDataset data{0, 0, {}, scheme};
    std::set<std::pair<std::size_t, std::size_t>> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const auto fields = split_fields(line, delimiter);
        if (fields.size() != 4) {
            throw ParseError("expected 4 fields, found " + std::to_string(fields.size()), line_no);
        }
        const auto user = parse_number<std::size_t>(fields[0], line_no, "user id");
        const auto item = parse_number<std::size_t>(fields[1], line_no, "item id");
        const auto rating = parse_number<double>(fields[2], line_no, "rating");
        const auto stamp = parse_number<std::int64_t>(fields[3], line_no, "timestamp");
        if (user == 0 || item == 0) {
            throw ParseError("ids are 1-based", line_no);
        }
        std::size_t level = 0;
        try {
            level = scheme.level_of_center(rating);
        } catch (const Error&) {
            throw ValidationError("rating " + fields[2] + " on line " + std::to_string(line_no) +
                                  " is not a level of the scheme");
        }
        if (!seen.emplace(user - 1, item - 1).second) {
            throw ValidationError("duplicate rating for user " + fields[0] + ", item " +
                                  fields[1] + " on line " + std::to_string(line_no));
        }
        data.records.push_back({user - 1, item - 1, level, stamp});
        data.user_count = std::max(data.user_count, user);
        data.item_count = std::max(data.item_count, item);
    }
    if (users) {
        if (*users < data.user_count) {
            throw ValidationError("user count override smaller than largest user id");
        }
        data.user_count = *users;
    }
    if (items) {
        if (*items < data.item_count) {
            throw ValidationError("item count override smaller than largest item id");
        }
        data.item_count = *items;
    }
    return data;
}

MaskSplit make_split(const ObservedMatrix& obs, double missing_rate, std::uint64_t seed)
{
    if (!(missing_rate > 0.0 && missing_rate < 1.0)) {
        throw DomainError("missing rate must lie in (0, 1)");
    }
    const auto& all = obs.observations();
    std::vector<std::size_t> order(all.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    const auto n_test = static_cast<std::size_t>(
        std::floor(missing_rate * static_cast<double>(all.size())));
    std::vector<bool> in_test(all.size(), false);
    for (std::size_t k = 0; k < n_test; ++k) {
        in_test[order[k]] = true;
    }
    // Keep source order inside each part.
    std::vector<Observation> train, test;
    for (std::size_t k = 0; k < all.size(); ++k) {
        (in_test[k] ? test : train).push_back(all[k]);
    }
    return {ObservedMatrix(obs.rows(), obs.cols(), std::move(train), obs.scheme()),
            ObservedMatrix(obs.rows(), obs.cols(), std::move(test), obs.scheme()), missing_rate,
            seed};
}

SyntheticInstance generate_synthetic(std::size_t rows, std::size_t cols, std::size_t rank,
                                     const QuantizationScheme& scheme,
                                     double observation_fraction, std::uint64_t seed)
{
    if (rows == 0 || cols == 0) {
        throw DomainError("synthetic matrix needs positive dimensions");
    }
    if (rank < 1 || rank > std::min(rows, cols)) {
        throw DomainError("rank must lie in [1, min(rows, cols)]");
    }
    if (!(observation_fraction > 0.0 && observation_fraction <= 1.0)) {
        throw DomainError("observation fraction must lie in (0, 1]");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto r = static_cast<Eigen::Index>(rows);
    const auto c = static_cast<Eigen::Index>(cols);
    auto gaussian = [&](Eigen::Index m, Eigen::Index n) {
        DenseMatrix a(m, n);
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index i = 0; i < m; ++i) {
                a(i, j) = normal(rng);
            }
        }
        return a;
    };

    const double g = scheme.gap();
    const double lo = scheme.lowest_bound() + 0.25 * g;
    const double hi = scheme.highest_bound() - 0.25 * g;
    DenseMatrix truth;
    if (rank >= 2) {
        // Affine rescaling adds a constant matrix, so one rank slot is
        // reserved for it: X = s·ABᵀ + b·11ᵀ with rank-1 fewer Gaussian factors.
        const auto k = static_cast<Eigen::Index>(rank - 1);
        const DenseMatrix a = gaussian(r, k);
        const DenseMatrix b = gaussian(c, k);
        const DenseMatrix x = a * b.transpose();
        const double xmin = x.minCoeff();
        const double xmax = x.maxCoeff();
        const double s = (hi - lo) / (xmax - xmin);
        truth = (s * x).array() + (lo - s * xmin);
    } else {
        // Rank one: positive factors in [1, 2), scaled so the maximum is hi.
        auto positive = [&](Eigen::Index n) {
            Vector<double> v(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double z = std::abs(normal(rng));
                v(i) = 1.0 + z / (1.0 + z);
            }
            return v;
        };
        const Vector<double> u = positive(r);
        const Vector<double> v = positive(c);
        const DenseMatrix x = u * v.transpose();
        truth = x * (hi / x.maxCoeff());
    }

    std::vector<std::size_t> cells(rows * cols);
    std::iota(cells.begin(), cells.end(), std::size_t{0});
    std::size_t keep = cells.size();
    if (observation_fraction < 1.0) {
        std::shuffle(cells.begin(), cells.end(), rng);
        keep = static_cast<std::size_t>(
            std::round(observation_fraction * static_cast<double>(cells.size())));
        cells.resize(keep);
        std::sort(cells.begin(), cells.end());
    }
    std::vector<Observation> obs;
    obs.reserve(keep);
    for (std::size_t flat : cells) {
        const std::size_t i = flat / cols;
        const std::size_t j = flat % cols;
        obs.push_back({i, j, scheme.quantize(truth(static_cast<Eigen::Index>(i),
                                                   static_cast<Eigen::Index>(j)))});
    }
    return {std::move(truth), ObservedMatrix(rows, cols, std::move(obs), scheme), rank, seed};
}

void save_matrix(const std::filesystem::path& path, const DenseMatrix& m)
{
    auto out = open_output(path);
    out << m.rows() << ' ' << m.cols() << '\n';
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) {
                out << ' ';
            }
            out << m(i, j);
        }
        out << '\n';
    }
}

DenseMatrix load_matrix(const std::filesystem::path& path)
{
    auto in = open_input(path);
    std::string header;
    if (!std::getline(in, header)) {
        throw ParseError("missing dimension header", 1);
    }
    std::istringstream hs(header);
    long long rows = -1, cols = -1;
    std::string extra;
    if (!(hs >> rows >> cols) || (hs >> extra) || rows < 0 || cols < 0) {
        throw ParseError("malformed dimension header '" + header + "'", 1);
    }
    std::vector<double> values;
    std::string token;
    while (in >> token) {
        values.push_back(parse_number<double>(token, 0, "matrix entry"));
    }
    if (values.size() != static_cast<std::size_t>(rows * cols)) {
        throw ParseError("header declares " + std::to_string(rows) + "x" + std::to_string(cols) +
                         " but " + std::to_string(values.size()) + " values follow");
    }
    DenseMatrix m(rows, cols);
    for (long long i = 0; i < rows; ++i) {
        for (long long j = 0; j < cols; ++j) {
            m(i, j) = values[static_cast<std::size_t>(i * cols + j)];
        }
    }
    return m;
}

void save_observed(const std::filesystem::path& path, const ObservedMatrix& obs)
{
    auto out = open_output(path);
    const auto& s = obs.scheme();
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << obs.rows() << ' ' << obs.cols() << ' ' << s.num_levels() << ' '
        << s.level_values().front() << ' ' << s.gap() << '\n';
    for (const auto& o : obs.observations()) {
        out << o.row << ' ' << o.col << ' ' << o.level << '\n';
    }
}

ObservedMatrix load_observed(const std::filesystem::path& path)
{
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("missing observation header", 1);
    }
    const auto h = split_fields(line, ' ');
    if (h.size() != 5) {
        throw ParseError("observation header needs 'rows cols levels first gap'", 1);
    }
    const auto rows = parse_number<std::size_t>(h[0], 1, "rows");
    const auto cols = parse_number<std::size_t>(h[1], 1, "cols");
    const auto levels = parse_number<std::size_t>(h[2], 1, "level count");
    const auto first = parse_number<double>(h[3], 1, "first level");
    const auto gap = parse_number<double>(h[4], 1, "gap");
    std::vector<Observation> obs;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto f = split_fields(line, ' ');
        if (f.empty()) {
            continue;
        }
        if (f.size() != 3) {
            throw ParseError("expected 'row col level'", line_no);
        }
        obs.push_back({parse_number<std::size_t>(f[0], line_no, "row"),
                       parse_number<std::size_t>(f[1], line_no, "col"),
                       parse_number<std::size_t>(f[2], line_no, "level")});
    }
    return ObservedMatrix(rows, cols, std::move(obs),
                          QuantizationScheme::uniform(first, gap, levels));
}

}  // namespace qmc
