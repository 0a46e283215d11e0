// Camera access and single-frame capture. Capture only ever happens in a
// click handler - there is no timer or background path that could send a
// frame without an explicit user action.

export class CameraPermissionDenied extends Error {
  constructor(cause: string) {
    super(`camera unavailable: ${cause}`);
    this.name = "CameraPermissionDenied";
  }
}

export async function startCamera(video: HTMLVideoElement): Promise<MediaStream> {
  const media = navigator.mediaDevices;
  if (!media || typeof media.getUserMedia !== "function") {
    throw new CameraPermissionDenied("no MediaDevices support");
  }
  let stream: MediaStream;
  try {
    stream = await media.getUserMedia({ video: true, audio: false });
  } catch (error) {
    throw new CameraPermissionDenied(error instanceof Error ? error.message : String(error));
  }
  video.srcObject = stream;
  await video.play().catch(() => undefined);
  return stream;
}

export function stopCamera(video: HTMLVideoElement): void {
  const stream = video.srcObject as MediaStream | null;
  stream?.getTracks().forEach((track) => track.stop());
  video.srcObject = null;
}

/** Draw the current video frame to a canvas and return it as a data URL
 * (the backend accepts data-URL payloads directly). */
export function grabFrame(video: HTMLVideoElement): string {
  const canvas = document.createElement("canvas");
  canvas.width = video.videoWidth || 640;
  canvas.height = video.videoHeight || 480;
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("canvas 2d context unavailable");
  ctx.drawImage(video, 0, 0, canvas.width, canvas.height);
  return canvas.toDataURL("image/jpeg", 0.9);
}
