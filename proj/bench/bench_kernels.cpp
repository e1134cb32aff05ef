// Timing comparison of the serial reference kernels against their OpenMP
// counterparts. Build and run:
//   cmake --build build --target bench_kernels && ./build/bench/bench_kernels

#include "offsetmodel/cluster.hpp"
#include "offsetmodel/kernels.hpp"
#include "offsetmodel/oracle.hpp"

#include <chrono>
#include <cstdio>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using offsetmodel::Exec;

double time_ms(const std::function<void()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count();
}

void report(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-28s serial %9.1f ms   parallel %9.1f ms   speedup %.2fx\n", name, serial_ms,
                parallel_ms, serial_ms / parallel_ms);
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP disabled; parallel kernels fall back to serial loops\n");
#endif

    const offsetmodel::PoseCatalog catalog = offsetmodel::default_study_catalog();
    const auto oracle = offsetmodel::SyntheticOracle::with_default_params(catalog.poses);
    const offsetmodel::NoticeabilityModel model = offsetmodel::exact_model(oracle);
    const offsetmodel::ArmPose pose = catalog.poses.front();

    {
        const offsetmodel::GridSpec2D grid{24.0, 301};
        std::vector<double> a, b;
        const double s = time_ms([&] {
            a = probability_grid(model, offsetmodel::Joint::shoulder, pose, grid, Exec::serial);
        });
        const double p = time_ms([&] {
            b = probability_grid(model, offsetmodel::Joint::shoulder, pose, grid, Exec::parallel);
        });
        report("probability_grid 301x301", s, p);
        if (a != b) std::printf("  MISMATCH between serial and parallel results!\n");
    }

    {
        const auto set = offsetmodel::applicable_set(model, pose, 0.5);
        const offsetmodel::GridSpec4D grid{24.0, 17};
        std::vector<std::uint8_t> a, b;
        const double s = time_ms([&] { a = membership_grid(*set.set, grid, Exec::serial); });
        const double p = time_ms([&] { b = membership_grid(*set.set, grid, Exec::parallel); });
        report("membership_grid 17^4", s, p);
        if (a != b) std::printf("  MISMATCH between serial and parallel results!\n");
    }

    {
        offsetmodel::StudyOptions options;
        options.participants = 24;
        options.seed = 7;
        offsetmodel::NoticeabilityDataset a, b;
        options.exec = Exec::serial;
        const double s = time_ms([&] { a = simulate_study(oracle, options); });
        options.exec = Exec::parallel;
        const double p = time_ms([&] { b = simulate_study(oracle, options); });
        report("simulate_study 24p", s, p);
        if (offsetmodel::write_trials_csv(a) != offsetmodel::write_trials_csv(b)) {
            std::printf("  MISMATCH between serial and parallel results!\n");
        }
    }

    {
        std::vector<offsetmodel::ArmPose> sample;
        for (int i = 0; i < 400; ++i) {
            sample.push_back({static_cast<double>(i % 170 - 80), static_cast<double>(i % 180),
                              static_cast<double>((3 * i) % 170 - 80),
                              static_cast<double>((7 * i) % 180)});
        }
        std::vector<double> a, b;
        const double s = time_ms([&] { a = pairwise_pose_distances(sample, Exec::serial); });
        const double p = time_ms([&] { b = pairwise_pose_distances(sample, Exec::parallel); });
        report("pairwise_distances 400", s, p);
        if (a != b) std::printf("  MISMATCH between serial and parallel results!\n");
    }

    return 0;
}
