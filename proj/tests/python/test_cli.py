"""End-to-end checks of the command-line surface. The binary path arrives in
EVDEBLUR_CLI; scene data is generated through the python module."""

import os
import subprocess
import sys
import tempfile

import numpy as np

try:
    import evdeblur as evd
except ImportError:
    import _evdeblur as evd

CLI = os.environ["EVDEBLUR_CLI"]


def run(*args, expect=0):
    proc = subprocess.run([CLI, *args], capture_output=True, text=True)
    assert proc.returncode == expect, (
        f"{args} -> exit {proc.returncode}, expected {expect}\n"
        f"stdout: {proc.stdout}\nstderr: {proc.stderr}"
    )
    return proc.stdout


def file_bytes(path):
    with open(path, "rb") as f:
        return f.read()


def make_video_dir(root, frames=60, width=32, height=32, shift=0.5):
    spec = evd.SceneSpec()
    spec.width = width
    spec.height = height
    spec.frames = frames
    spec.shift_frac = shift
    video = evd.make_scene(spec)
    evd.write_video_dir(os.path.join(root, "video"), video)
    return video


def main():
    with tempfile.TemporaryDirectory() as tmp:
        video = make_video_dir(tmp)
        ts = video.timestamps
        vdir = os.path.join(tmp, "video")
        events = os.path.join(tmp, "events.evt")
        blurs = os.path.join(tmp, "blurs")

        out = run("simulate", "--video", vdir, "--out", events, "--threshold", "0.2")
        assert "wrote" in out
        run("blur", "--video", vdir, "--frames", "25", "--out", blurs)
        exposures = {}
        with open(os.path.join(blurs, "exposures.txt")) as f:
            for line in f:
                name, start, end = line.split()
                exposures[name] = (start, end)
        assert len(exposures) == 2
        print("ok simulate+blur")

        (b0_start, b0_end) = exposures["blur_000.pgm"]
        blur0 = os.path.join(blurs, "blur_000.pgm")
        latent = os.path.join(tmp, "latent.pgm")
        run("deblur", "--blur", blur0, "--exposure", f"{b0_start}:{b0_end}",
            "--events", events, "--t", "mid", "--out", latent)
        restored = evd.read_pnm(latent)
        truth = video.frame(12)
        blurry = evd.read_pnm(blur0)
        assert evd.psnr(restored, truth) > evd.psnr(blurry, truth) + 3.0
        print("ok deblur quality")

        # rerunning is byte-identical
        latent2 = os.path.join(tmp, "latent2.pgm")
        run("deblur", "--blur", blur0, "--exposure", f"{b0_start}:{b0_end}",
            "--events", events, "--t", "mid", "--out", latent2)
        assert file_bytes(latent) == file_bytes(latent2)
        print("ok deblur deterministic")

        # empty event file: the latent equals the blurry input, exit 0
        empty = os.path.join(tmp, "empty.evt")
        empty_stream = evd.EventStream(
            t=np.zeros(0), x=np.zeros(0, np.int32), y=np.zeros(0, np.int32),
            p=np.zeros(0, np.int32), width=32, height=32,
            span=evd.TimeInterval(0.0, 0.0))
        evd.write_events(empty, empty_stream)
        passthrough = os.path.join(tmp, "passthrough.pgm")
        run("deblur", "--blur", blur0, "--exposure", f"{b0_start}:{b0_end}",
            "--events", empty, "--t", "mid", "--out", passthrough)
        assert file_bytes(passthrough) == file_bytes(blur0)
        print("ok deblur empty-events passthrough")

        # blur2blur with a degenerate target equals the deblur output
        retimed = os.path.join(tmp, "retimed.pgm")
        t_mid = 0.5 * (float(b0_start) + float(b0_end))
        run("blur2blur", "--blur", blur0, "--exposure", f"{b0_start}:{b0_end}",
            "--events", events, "--target", f"{t_mid}:{t_mid}", "--out", retimed)
        assert file_bytes(retimed) == file_bytes(latent)
        print("ok blur2blur degenerate target")

        # eger writes a 6N-channel tensor over the requested target
        tensor_path = os.path.join(tmp, "tensor.egr")
        out = run("eger", "--events", events, "--target", "0.3:0.6", "--bins", "5",
                  "--out", tensor_path)
        assert "30x32x32" in out
        tensor = evd.read_eger(tensor_path)
        assert tensor.numpy().shape == (30, 32, 32)
        print("ok eger tensor")

        # calibrate from the two adjacent windows
        (b1_start, b1_end) = exposures["blur_001.pgm"]
        out = run("calibrate", "--blur", blur0, "--exposure", f"{b0_start}:{b0_end}",
                  "--blur2", os.path.join(blurs, "blur_001.pgm"),
                  "--exposure2", f"{b1_start}:{b1_end}", "--events", events)
        c_line = [l for l in out.splitlines() if l.startswith("c=")][0]
        assert abs(float(c_line[2:]) - 0.2) < 0.05, c_line
        print("ok calibrate")

        # dataset + eval
        ds = os.path.join(tmp, "ds")
        run("dataset", "--video", vdir, "--out", ds, "--hr-width", "32",
            "--hr-height", "32", "--ratio", "4", "--frames", "9", "--m", "2")
        assert os.path.exists(os.path.join(ds, "manifest.txt"))
        gt_dir = os.path.join(tmp, "gt")
        os.makedirs(gt_dir)
        evd.write_pnm(os.path.join(gt_dir, "a.pgm"), truth)
        rest_dir = os.path.join(tmp, "restored")
        os.makedirs(rest_dir)
        evd.write_pnm(os.path.join(rest_dir, "a.pgm"), restored)
        out = run("eval", "--restored", rest_dir, "--gt", gt_dir, "--label", "edi",
                  "--out", os.path.join(tmp, "report"))
        assert "edi" in out and os.path.exists(os.path.join(tmp, "report.csv"))
        print("ok dataset+eval")

        # empty results still emit the header-only tables
        run("eval", "--out", os.path.join(tmp, "empty_report"))
        with open(os.path.join(tmp, "empty_report.csv")) as f:
            assert f.read() == "method,psnr_color,ssim_color,psnr_gray,ssim_gray\n"
        print("ok eval empty results")

        # per-sample consistency losses over the generated dataset
        out = run("losses", "--manifest", os.path.join(ds, "manifest.txt"),
                  "--id", "sample_000", "--out", os.path.join(tmp, "losses"))
        assert "pair=sample_000" in out and "loss_bc=" in out
        with open(os.path.join(tmp, "losses.csv")) as f:
            header = f.readline().strip()
            assert header == "pair,L_BC,L_SC,L_TG,L_SG,total"
            row = f.readline().split(",")
            assert row[0] == "sample_000" and float(row[5]) >= 0.0
        print("ok losses report")

        # exit codes: usage=1, data error=2
        proc = subprocess.run([CLI, "deblur", "--no-such-flag"], capture_output=True)
        assert proc.returncode == 1, proc.returncode
        proc = subprocess.run(
            [CLI, "deblur", "--blur", "missing.pgm", "--exposure", "0:1",
             "--events", events, "--t", "mid", "--out", "x.pgm"],
            capture_output=True)
        assert proc.returncode == 2, proc.returncode
        print("ok exit codes")

    print("cli tests passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
