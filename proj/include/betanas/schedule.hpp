#pragma once

#include <string>

#include "betanas/array.hpp"

namespace betanas::schedule {

// Per-epoch regularization coefficient. Epochs are 1-based; the coefficient
// is constant within an epoch.
enum class ScheduleKind { LinearUp, Constant, LinearDown };

inline const char* schedule_token(ScheduleKind k) {
    switch (k) {
        case ScheduleKind::LinearUp: return "linear_up";
        case ScheduleKind::Constant: return "constant";
        case ScheduleKind::LinearDown: return "linear_down";
    }
    return "?";
}

inline ScheduleKind schedule_from_token(const std::string& t) {
    if (t == "linear_up") return ScheduleKind::LinearUp;
    if (t == "constant") return ScheduleKind::Constant;
    if (t == "linear_down") return ScheduleKind::LinearDown;
    throw ConfigError("unknown schedule '" + t + "' (expected linear_up|constant|linear_down)");
}

struct LambdaSchedule {
    ScheduleKind kind = ScheduleKind::Constant;
    double start = 0.0;
    double end = 0.0;
    int total_epochs = 1;

    static LambdaSchedule make(ScheduleKind kind, double start, double end, int total_epochs) {
        if (total_epochs < 1) throw ConfigError("schedule needs at least 1 epoch");
        if (start < 0.0 || end < 0.0) throw ConfigError("lambda must be non-negative");
        if (kind == ScheduleKind::LinearUp && end < start)
            throw ConfigError("linear_up needs lambda_end >= lambda_start");
        if (kind == ScheduleKind::LinearDown && start < end)
            throw ConfigError("linear_down needs lambda_start >= lambda_end");
        if (kind == ScheduleKind::Constant) start = end;  // constant level comes from `end`
        return LambdaSchedule{kind, start, end, total_epochs};
    }

    static LambdaSchedule linear_up(double start, double end, int epochs) {
        return make(ScheduleKind::LinearUp, start, end, epochs);
    }
    static LambdaSchedule constant(double level, int epochs) {
        return make(ScheduleKind::Constant, level, level, epochs);
    }
    static LambdaSchedule linear_down(double start, double end, int epochs) {
        return make(ScheduleKind::LinearDown, start, end, epochs);
    }
};

inline double lambda_at(const LambdaSchedule& s, int epoch) {
    if (epoch < 1 || epoch > s.total_epochs)
        throw ConfigError("epoch " + std::to_string(epoch) + " outside [1, " +
                          std::to_string(s.total_epochs) + "]");
    if (s.kind == ScheduleKind::Constant) return s.end;
    if (s.total_epochs == 1) return s.kind == ScheduleKind::LinearUp ? s.end : s.start;
    if (epoch == 1) return s.start;
    if (epoch == s.total_epochs) return s.end;
    return s.start + (s.end - s.start) * (epoch - 1) / (s.total_epochs - 1);
}

}  // namespace betanas::schedule
