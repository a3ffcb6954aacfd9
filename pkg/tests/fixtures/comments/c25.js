var a = 1, b = 2, c = 3, x = 1, img = ee.Image(0), s = 'z';
Map.addLayer(img, {min: 0, max: 1 /* vis */}, 'NDVI // name');
var s = "/* not a comment */"; /* real one */
// standalone comment 41
var re = /\/\*.*?\*\//g; // regex with comment delimiters

var d = x++ / 2; /* after postfix */

var r2 = /[/]+/.test('a//b');
