#include "birkhoff/bitmap.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include "json.hpp"

#include "birkhoff/error.hpp"
#include "birkhoff/io.hpp"

namespace birkhoff {

AnnulusBitmap::AnnulusBitmap(const BitmapGeometry& geometry, bool filled) : geometry_(geometry) {
    if (geometry.n_theta < 64 || geometry.n_p < 64) throw ConfigError("bitmap needs at least 64 cells per side");
    if (!(geometry.p_min < geometry.p_max)) throw ConfigError("bitmap needs p_min < p_max");
    if (!(geometry.period > 0.0)) throw ConfigError("bitmap needs a positive theta period");
    bits_.assign(geometry.n_theta * geometry.n_p, filled ? 1 : 0);
}

double AnnulusBitmap::theta_center(std::size_t i) const {
    return geometry_.theta0 + (static_cast<double>(i) + 0.5) * cell_width();
}

double AnnulusBitmap::p_center(std::size_t j) const {
    // symmetric form: a centre at p = 0 comes out exactly zero
    const auto n = static_cast<double>(geometry_.n_p), k = static_cast<double>(j);
    return (geometry_.p_min * (2.0 * n - 2.0 * k - 1.0) + geometry_.p_max * (2.0 * k + 1.0)) / (2.0 * n);
}

std::optional<std::pair<std::size_t, std::size_t>> AnnulusBitmap::cell_of(double theta, double p) const {
    if (!std::isfinite(theta) || !(p >= geometry_.p_min) || !(p < geometry_.p_max)) return std::nullopt;
    const double s = (theta - geometry_.theta0) / cell_width();
    const auto n = static_cast<long>(geometry_.n_theta);
    long i = static_cast<long>(std::floor(s)) % n;
    if (i < 0) i += n;
    const auto j = std::min<std::size_t>(static_cast<std::size_t>((p - geometry_.p_min) / cell_height()), geometry_.n_p - 1);
    return std::pair{static_cast<std::size_t>(i), j};
}

std::size_t AnnulusBitmap::count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

void AnnulusBitmap::require_same(const AnnulusBitmap& other) const {
    if (!(geometry_ == other.geometry_)) throw ConfigError("bitmap set operation on different geometries");
}

AnnulusBitmap AnnulusBitmap::operator&(const AnnulusBitmap& other) const {
    require_same(other);
    AnnulusBitmap r(geometry_);
    for (std::size_t k = 0; k < bits_.size(); ++k) r.bits_[k] = bits_[k] & other.bits_[k];
    return r;
}

AnnulusBitmap AnnulusBitmap::operator|(const AnnulusBitmap& other) const {
    require_same(other);
    AnnulusBitmap r(geometry_);
    for (std::size_t k = 0; k < bits_.size(); ++k) r.bits_[k] = bits_[k] | other.bits_[k];
    return r;
}

AnnulusBitmap AnnulusBitmap::operator-(const AnnulusBitmap& other) const {
    require_same(other);
    AnnulusBitmap r(geometry_);
    for (std::size_t k = 0; k < bits_.size(); ++k) r.bits_[k] = bits_[k] & (1 - other.bits_[k]);
    return r;
}

AnnulusBitmap AnnulusBitmap::complement() const {
    AnnulusBitmap r(geometry_);
    for (std::size_t k = 0; k < bits_.size(); ++k) r.bits_[k] = 1 - bits_[k];
    return r;
}

bool AnnulusBitmap::subset_of(const AnnulusBitmap& other) const {
    require_same(other);
    for (std::size_t k = 0; k < bits_.size(); ++k)
        if (bits_[k] && !other.bits_[k]) return false;
    return true;
}

AnnulusBitmap AnnulusBitmap::dilated(std::size_t radius) const {
    const std::size_t nt = geometry_.n_theta, np = geometry_.n_p;
    const long r = static_cast<long>(std::min(radius, nt / 2));
    // separable: rows (periodic) then columns (clamped)
    AnnulusBitmap rows(geometry_), out(geometry_);
    for (std::size_t j = 0; j < np; ++j) {
        for (std::size_t i = 0; i < nt; ++i) {
            if (!get(i, j)) continue;
            for (long d = -r; d <= r; ++d)
                rows.set(static_cast<std::size_t>((static_cast<long>(i) + d + static_cast<long>(nt)) % static_cast<long>(nt)), j);
        }
    }
    for (std::size_t j = 0; j < np; ++j) {
        const std::size_t lo = j >= static_cast<std::size_t>(r) ? j - static_cast<std::size_t>(r) : 0;
        const std::size_t hi = std::min(np - 1, j + static_cast<std::size_t>(r));
        for (std::size_t i = 0; i < nt; ++i) {
            if (!rows.get(i, j)) continue;
            for (std::size_t k = lo; k <= hi; ++k) out.set(i, k);
        }
    }
    return out;
}

AnnulusBitmap AnnulusBitmap::flood(std::size_t row) const {
    const std::size_t nt = geometry_.n_theta, np = geometry_.n_p;
    AnnulusBitmap seen(geometry_);
    std::deque<std::size_t> queue;
    for (std::size_t i = 0; i < nt; ++i) {
        if (get(i, row)) {
            seen.set(i, row);
            queue.push_back(row * nt + i);
        }
    }
    while (!queue.empty()) {
        const std::size_t k = queue.front();
        queue.pop_front();
        const std::size_t i = k % nt, j = k / nt;
        const std::size_t nbr[4][2] = {{(i + 1) % nt, j}, {(i + nt - 1) % nt, j}, {i, j + 1}, {i, j - 1}};
        for (int m = 0; m < 4; ++m) {
            const std::size_t a = nbr[m][0], b = nbr[m][1];
            if ((m == 2 && j + 1 >= np) || (m == 3 && j == 0)) continue;
            if (get(a, b) && !seen.get(a, b)) {
                seen.set(a, b);
                queue.push_back(b * nt + a);
            }
        }
    }
    return seen;
}

AnnulusBitmap AnnulusBitmap::flood_from_top() const { return flood(geometry_.n_p - 1); }
AnnulusBitmap AnnulusBitmap::flood_from_bottom() const { return flood(0); }

std::vector<std::uint32_t> AnnulusBitmap::chebyshev_distance() const {
    const std::size_t nt = geometry_.n_theta, np = geometry_.n_p;
    std::vector<std::uint32_t> dist(bits_.size(), std::numeric_limits<std::uint32_t>::max());
    std::deque<std::size_t> queue;
    for (std::size_t k = 0; k < bits_.size(); ++k) {
        if (bits_[k]) {
            dist[k] = 0;
            queue.push_back(k);
        }
    }
    while (!queue.empty()) {
        const std::size_t k = queue.front();
        queue.pop_front();
        const std::size_t i = k % nt, j = k / nt;
        for (int dj = -1; dj <= 1; ++dj) {
            if ((dj < 0 && j == 0) || (dj > 0 && j + 1 >= np)) continue;
            for (int di = -1; di <= 1; ++di) {
                const std::size_t a = (i + nt + static_cast<std::size_t>(di + 1) - 1) % nt;
                const std::size_t b = static_cast<std::size_t>(static_cast<long>(j) + dj);
                const std::size_t m = b * nt + a;
                if (dist[m] > dist[k] + 1) {
                    dist[m] = dist[k] + 1;
                    queue.push_back(m);
                }
            }
        }
    }
    return dist;
}

std::vector<Point2> AnnulusBitmap::cell_centers() const {
    std::vector<Point2> out;
    for (const auto& [i, j] : cells()) out.push_back({theta_center(i), p_center(j)});
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> AnnulusBitmap::cells() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t j = 0; j < geometry_.n_p; ++j)
        for (std::size_t i = 0; i < geometry_.n_theta; ++i)
            if (get(i, j)) out.emplace_back(i, j);
    return out;
}

std::string sidecar_path(const std::string& pbm_path) {
    const auto dot = pbm_path.find_last_of('.');
    const auto slash = pbm_path.find_last_of('/');
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) return pbm_path.substr(0, dot) + ".json";
    return pbm_path + ".json";
}

void AnnulusBitmap::write_pbm(const std::string& path) const {
    const std::size_t nt = geometry_.n_theta, np = geometry_.n_p;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << "P4\n" << nt << ' ' << np << '\n';
    const std::size_t stride = (nt + 7) / 8;
    std::vector<unsigned char> line(stride);
    for (std::size_t r = 0; r < np; ++r) {
        const std::size_t j = np - 1 - r;
        std::fill(line.begin(), line.end(), 0);
        for (std::size_t i = 0; i < nt; ++i)
            if (get(i, j)) line[i / 8] |= static_cast<unsigned char>(0x80u >> (i % 8));
        out.write(reinterpret_cast<const char*>(line.data()), static_cast<std::streamsize>(stride));
    }
    nlohmann::json meta = {{"n_theta", nt},
                           {"n_p", np},
                           {"theta0", geometry_.theta0},
                           {"period", geometry_.period},
                           {"p_min", geometry_.p_min},
                           {"p_max", geometry_.p_max},
                           {"cell_width", cell_width()},
                           {"cell_height", cell_height()},
                           {"occupied", count()},
                           {"row_order", "first row is the largest p"}};
    std::ofstream side(sidecar_path(path));
    if (!side) throw ConfigError("cannot write " + sidecar_path(path));
    side << meta.dump(2) << '\n';
}

AnnulusBitmap AnnulusBitmap::read_pbm(const std::string& path) {
    std::ifstream side(sidecar_path(path));
    if (!side) throw ConfigError("missing bitmap sidecar " + sidecar_path(path));
    const auto meta = nlohmann::json::parse(side);
    BitmapGeometry g{meta.at("n_theta").get<std::size_t>(), meta.at("n_p").get<std::size_t>(),
                     meta.at("theta0").get<double>(), meta.at("period").get<double>(),
                     meta.at("p_min").get<double>(), meta.at("p_max").get<double>()};
    std::ifstream in(path, std::ios::binary);
    std::string magic;
    std::size_t nt = 0, np = 0;
    in >> magic >> nt >> np;
    if (!in || magic != "P4" || nt != g.n_theta || np != g.n_p) throw ConfigError("malformed bitmap " + path);
    in.get();
    AnnulusBitmap b(g);
    const std::size_t stride = (nt + 7) / 8;
    std::vector<unsigned char> line(stride);
    for (std::size_t r = 0; r < np; ++r) {
        if (!in.read(reinterpret_cast<char*>(line.data()), static_cast<std::streamsize>(stride)))
            throw ConfigError("truncated bitmap " + path);
        for (std::size_t i = 0; i < nt; ++i)
            if (line[i / 8] & (0x80u >> (i % 8))) b.set(i, np - 1 - r);
    }
    return b;
}

void AnnulusBitmap::write_csv(const std::string& path) const {
    io::CsvWriter w(path, {"theta", "p"});
    for (const auto& c : cell_centers()) w.row({c.x, c.y});
}

}  // namespace birkhoff
