#include "anytime/controller.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <string>

#include "anytime/errors.hpp"

namespace anytime {

namespace {

// Writes u_1..u_N into out[0..N). `out` may alias buffer slots.
void fill_tentative(const PlantModel& plant, const Vector& x, int n, double slack, Vector* out,
                    std::vector<Vector>* states) {
    Vector chi = x;
    double v = plant.lyapunov(chi);
    for (int j = 1; j <= n; ++j) {
        Vector u = plant.policy(chi);
        Vector next = nominal_step(plant, chi, u);
        const double v_next = plant.lyapunov(next);
        const double bound = plant.rho * v;
        if (!(v_next <= bound + slack * std::max(1.0, bound))) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "decrease test failed at tentative step " << j << ": V(chi_" << j + 1
                << ") = " << v_next << " > rho V(chi_" << j << ") = " << bound;
            throw CertificateViolation(j, msg.str());
        }
        out[j - 1] = std::move(u);
        if (states) states->push_back(next);
        chi = std::move(next);
        v = v_next;
    }
}

void require_length(int n, const BufferState& buf) {
    if (n < 0 || n > buf.capacity()) {
        std::ostringstream msg;
        msg << "sequence length " << n << " outside [0, " << buf.capacity() << "]";
        throw PreconditionError(msg.str());
    }
}

}  // namespace

std::string_view to_string(ControllerKind kind) {
    switch (kind) {
        case ControllerKind::baseline: return "baseline";
        case ControllerKind::a1: return "a1";
        case ControllerKind::a2: return "a2";
    }
    return "unknown";
}

ControllerKind parse_controller_kind(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "baseline") return ControllerKind::baseline;
    if (lower == "a1") return ControllerKind::a1;
    if (lower == "a2") return ControllerKind::a2;
    throw ConfigError("controller.kind",
                      "unknown controller '" + std::string(text) + "' (expected baseline|a1|a2)");
}

BufferState::BufferState(int capacity, int input_dim)
    : slots(static_cast<std::size_t>(std::max(capacity, 0)), Vector::Zero(input_dim)) {
    if (capacity < 1) throw PreconditionError("buffer capacity must be >= 1");
}

void BufferState::shift() {
    if (slots.empty()) return;
    for (std::size_t i = 0; i + 1 < slots.size(); ++i) slots[i] = slots[i + 1];
    slots.back().setZero();
    effective_length = std::max(effective_length - 1, 0);
}

void BufferState::clear() {
    for (auto& s : slots) s.setZero();
    effective_length = 0;
}

bool BufferState::tail_is_zero() const {
    for (std::size_t i = static_cast<std::size_t>(std::max(effective_length, 0)); i < slots.size();
         ++i)
        if (!slots[i].isZero(0.0)) return false;
    return true;
}

bool operator==(const BufferState& a, const BufferState& b) {
    if (a.effective_length != b.effective_length || a.slots.size() != b.slots.size()) return false;
    for (std::size_t i = 0; i < a.slots.size(); ++i)
        if (a.slots[i].size() != b.slots[i].size() || a.slots[i] != b.slots[i]) return false;
    return true;
}

BufferState shift(BufferState buf) {
    buf.shift();
    return buf;
}

TentativeSequence tentative_sequence(const PlantModel& plant, const Vector& x, int n,
                                     double slack) {
    if (n < 1) throw PreconditionError("tentative sequence length must be >= 1");
    TentativeSequence seq;
    seq.controls.resize(static_cast<std::size_t>(n));
    seq.predicted_states.reserve(static_cast<std::size_t>(n));
    fill_tentative(plant, x, n, slack, seq.controls.data(), &seq.predicted_states);
    return seq;
}

Vector apply_step(ControllerKind kind, const PlantModel& plant, const Vector& x, int n,
                  BufferState& buf, double slack) {
    switch (kind) {
        case ControllerKind::baseline: {
            buf.clear();
            if (n >= 1) {
                fill_tentative(plant, x, 1, slack, buf.slots.data(), nullptr);
                buf.effective_length = 1;
            }
            return buf.slots.front();
        }
        case ControllerKind::a1: {
            require_length(n, buf);
            if (n == 0) {
                buf.shift();
                return buf.slots.front();
            }
            fill_tentative(plant, x, n, slack, buf.slots.data(), nullptr);
            for (std::size_t i = static_cast<std::size_t>(n); i < buf.slots.size(); ++i)
                buf.slots[i].setZero();
            buf.effective_length = n;
            return buf.slots.front();
        }
        case ControllerKind::a2: {
            require_length(n, buf);
            const int previous = buf.effective_length;
            buf.shift();
            if (n >= 1) {
                fill_tentative(plant, x, n, slack, buf.slots.data(), nullptr);
                buf.effective_length = std::max(n, previous - 1);
            }
            return buf.slots.front();
        }
    }
    throw PreconditionError("unknown controller kind");
}

StepResult controller_step(ControllerKind kind, const PlantModel& plant, const Vector& x, int n,
                           const BufferState& buf, double slack) {
    StepResult result{Vector(), buf};
    result.input = apply_step(kind, plant, x, n, result.buffer, slack);
    return result;
}

Vector predict_buffer_playback(const PlantModel& plant, const Vector& x, const BufferState& buf,
                               int j) {
    if (j < 0) throw PreconditionError("playback length must be >= 0");
    const Vector zero = Vector::Zero(plant.input_dim);
    Vector state = x;
    for (int s = 0; s < j; ++s) {
        const bool stored = s < buf.effective_length && s < buf.capacity();
        state = nominal_step(plant, state, stored ? buf.slots[static_cast<std::size_t>(s)] : zero);
    }
    return state;
}

Controller::Controller(const ControllerSpec& spec, const PlantModel& plant, int max_length,
                       double slack)
    : kind_(spec.kind), plant_(&plant), slack_(slack) {
    if (max_length < 1) throw PreconditionError("maximum sequence length must be >= 1");
    int capacity = max_length;
    if (spec.buffer_cap) {
        if (*spec.buffer_cap < 1)
            throw ConfigError("controller.buffer_cap", "must be >= 1");
        capacity = std::min(capacity, *spec.buffer_cap);
    }
    buffer_ = BufferState(capacity, plant.input_dim);
}

Vector Controller::step(const Vector& x, int n) {
    return apply_step(kind_, *plant_, x, std::min(n, buffer_.capacity()), buffer_, slack_);
}

}  // namespace anytime
