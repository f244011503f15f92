#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gcm/arith/precision.hpp"
#include "gcm/arith/rational.hpp"

namespace gcm {

/// Reasons a raw atom list is rejected.
class MeasureError : public InputError {
public:
    enum class Kind { WeightSumNotOne, NonpositiveWeight, DuplicateLocation, Empty };

    MeasureError(Kind kind, const std::string& what) : InputError(what), kind_(kind) {}
    [[nodiscard]] Kind kind() const { return kind_; }

private:
    Kind kind_;
};

struct Atom {
    Rational location;
    Rational weight;

    friend bool operator==(const Atom&, const Atom&) = default;
};

/// Finitely supported probability measure with exact rational atoms and
/// weights. Atoms are sorted by location; weights are positive and sum to 1.
class AtomicMeasure {
public:
    /// Normalizes (sorts) and validates a raw atom list.
    static AtomicMeasure validate(std::vector<Atom> raw) {
        if (raw.empty()) throw MeasureError(MeasureError::Kind::Empty, "measure has no atoms");
        Rational total(0);
        for (const auto& atom : raw) {
            if (atom.weight.sign() <= 0)
                throw MeasureError(MeasureError::Kind::NonpositiveWeight,
                                   "nonpositive weight " + atom.weight.to_string() + " at " + atom.location.to_string());
            total += atom.weight;
        }
        std::sort(raw.begin(), raw.end(), [](const Atom& a, const Atom& b) { return a.location < b.location; });
        for (std::size_t i = 1; i < raw.size(); ++i) {
            if (raw[i].location == raw[i - 1].location)
                throw MeasureError(MeasureError::Kind::DuplicateLocation,
                                   "duplicate atom location " + raw[i].location.to_string());
        }
        if (total != Rational(1))
            throw MeasureError(MeasureError::Kind::WeightSumNotOne, "weights sum to " + total.to_string() + ", not 1");
        return AtomicMeasure(std::move(raw));
    }

    [[nodiscard]] const std::vector<Atom>& atoms() const { return atoms_; }
    [[nodiscard]] std::size_t size() const { return atoms_.size(); }

    /// R = max |a_i|.
    [[nodiscard]] const Rational& support_radius() const { return radius_; }

    /// mu(-A) = mu(A): every atom has a mirror image of equal weight.
    [[nodiscard]] bool is_symmetric() const { return symmetric_; }

    /// Rightmost atom (largest location).
    [[nodiscard]] const Atom& rightmost() const { return atoms_.back(); }
    [[nodiscard]] const Atom& leftmost() const { return atoms_.front(); }

    /// The same measure reflected through the origin.
    [[nodiscard]] AtomicMeasure reflected() const {
        std::vector<Atom> r;
        r.reserve(atoms_.size());
        for (const auto& a : atoms_) r.push_back({-a.location, a.weight});
        return validate(std::move(r));
    }

    /// Canonical text form "a:w;a:w;..." used for checksums and ordering.
    [[nodiscard]] std::string canonical_string() const {
        std::string s;
        for (const auto& a : atoms_) s += a.location.to_string() + ":" + a.weight.to_string() + ";";
        return s;
    }

    /// FNV-1a 64-bit hash of canonical_string().
    [[nodiscard]] std::uint64_t checksum() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (const unsigned char c : canonical_string()) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    friend bool operator==(const AtomicMeasure& a, const AtomicMeasure& b) { return a.atoms_ == b.atoms_; }

private:
    explicit AtomicMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
        radius_ = Rational(0);
        for (const auto& a : atoms_) radius_ = std::max(radius_, abs(a.location));
        symmetric_ = true;
        const std::size_t n = atoms_.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Atom& lo = atoms_[i];
            const Atom& hi = atoms_[n - 1 - i];
            if (lo.location != -hi.location || lo.weight != hi.weight) {
                symmetric_ = false;
                break;
            }
        }
    }

    std::vector<Atom> atoms_;
    Rational radius_;
    bool symmetric_ = false;
};

/// Weights c_j (in thousandths) of the symmetric pairs at +-(9/5 + j).
inline constexpr long kPaperPairWeights[8] = {34, 93, 134, 123, 75, 31, 8, 1};

/// Center weight (in thousandths) of the atom at 0.
inline constexpr long kPaperCenterWeight = 2;

/// Checksum of the built-in 17-atom measure, guarding the data constants.
inline constexpr std::uint64_t kPaperMeasureChecksum = 0xc479c4d98a5171ffULL;

/// The built-in 17-atom counterexample measure
/// 0.002 delta_0 + sum_j c_j (delta_{1.8+j} + delta_{-(1.8+j)}).
inline AtomicMeasure paper_measure() {
    std::vector<Atom> atoms;
    atoms.push_back({Rational(0), Rational(kPaperCenterWeight, 1000)});
    for (long j = 0; j < 8; ++j) {
        const Rational a = Rational(9, 5) + Rational(j);
        const Rational w(kPaperPairWeights[j], 1000);
        atoms.push_back({a, w});
        atoms.push_back({-a, w});
    }
    AtomicMeasure mu = AtomicMeasure::validate(std::move(atoms));
    if (mu.checksum() != kPaperMeasureChecksum) throw std::logic_error("built-in measure data is corrupted");
    return mu;
}

/// Point mass at the origin.
inline AtomicMeasure dirac_measure(const Rational& location = Rational(0)) {
    return AtomicMeasure::validate({{location, Rational(1)}});
}

/// Time, derivative order and working precision of one evaluation.
struct EvaluationContext {
    Rational t;
    int m = 5;
    Precision prec;

    EvaluationContext(Rational t_, int m_, Precision p) : t(std::move(t_)), m(m_), prec(p) {
        if (t.sign() <= 0) throw InputError("evaluation time must be positive, got " + t.to_string());
        if (m < 1) throw InputError("derivative order must be at least 1");
        if (m > 40) throw InputError("derivative order above 40 is not supported");
    }
};

}  // namespace gcm
